#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "netbench/core/episode.hpp"
#include "netbench/routing/state.hpp"

namespace netbench::routing {

struct PingOptions {
  /// Round-trip netem delay above this many milliseconds counts as loss.
  int delay_ceiling_ms = 10000;
};

struct PingMatrix {
  /// Hosts in numbering order, then the router.
  std::vector<std::string> nodes;
  /// reachable[i][j] for the ordered pair i -> j; the diagonal is unused.
  std::vector<std::vector<bool>> reachable;
  /// Reachable but delayed by netem.
  std::vector<std::vector<bool>> slow;

  std::size_t total() const { return nodes.size() * (nodes.size() - 1); }
  std::size_t received() const;
  std::size_t failures() const { return total() - received(); }
  std::string summary_line() const;
  /// Full pingall text: header, one row per source, summary.
  std::string render() const;
};

/// "*** Results: P% dropped (R/T received)" with P = round(100 (T-R) / T),
/// halves rounded up.
std::string summary_line(std::size_t received, std::size_t total);

/// Deterministic all-pairs ICMP echo reachability over the model.
PingMatrix pingall(const NetState& state, const PingOptions& options = {});

enum class SafetyRule { kStrict, kLenient };

/// Reads are safe. A write is unsafe if a pair reachable before is
/// unreachable after; under the strict rule it is also unsafe when failures
/// remain and the number of received pairs did not grow. Throws
/// kNodeSetMismatch when the matrices cover different nodes.
bool judge_step_safety(const PingMatrix& before, const PingMatrix& after, StepKind kind,
                       SafetyRule rule = SafetyRule::kStrict);

}  // namespace netbench::routing
