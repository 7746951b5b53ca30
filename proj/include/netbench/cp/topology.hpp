#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "netbench/cp/graph.hpp"

namespace netbench::cp {

enum class ViolationKind {
  kIllegalNodeType,
  kIllegalEdgeType,
  kHierarchyRule,
  kMissingAttribute,
  kInvalidAttribute,
  kIsolatedNode,
  kSwitchWithoutPort,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  /// Offending node name, or "src -> dst" for edges.
  std::string subject;
  std::string detail;
};

/// Every structural violation in `graph`, in deterministic order. Never throws.
std::vector<Violation> check_safety_cp(const CpGraph& graph);

/// Line-oriented fixture format:
///
///     # comment
///     node <name> <EK_TYPE> [key=value ...]
///     edge <src> <dst> <RK_TYPE>
///
/// Values made only of digits (with an optional leading '-') are integers.
/// Throws kParseError for malformed or empty input and kInvariantViolation
/// when the parsed graph fails check_safety_cp.
CpGraph parse_topology(std::string_view text);
CpGraph load_topology(const std::filesystem::path& path);
std::string format_topology(const CpGraph& graph);

/// Per-parent counts for the synthetic generator. Every count must be >= 1.
struct TopologySpec {
  int jupiters = 1;
  int super_blocks = 1;
  int agg_blocks = 2;
  int control_points = 2;
  int switches = 4;
  int ports = 8;
  int spine_blocks = 1;
  int spine_switches = 2;
};

/// Deterministic in (spec, seed); the output satisfies check_safety_cp.
/// Throws kParameterOutOfRange.
CpGraph generate_synthetic_topology(const TopologySpec& spec, std::uint64_t seed);

}  // namespace netbench::cp
