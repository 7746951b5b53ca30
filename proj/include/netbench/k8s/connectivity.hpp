#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "netbench/core/episode.hpp"
#include "netbench/k8s/policy.hpp"

namespace netbench::k8s {

/// Whitelist semantics: a pod selected by no policy of the matching type is
/// unrestricted in that direction; otherwise some selecting policy must
/// admit the peer and the (port, protocol).
bool ingress_allows(const PolicySet& policies, const std::string& src, const std::string& dst, int port,
                    const std::string& protocol = "TCP");
bool egress_allows(const PolicySet& policies, const std::string& src, const std::string& dst, int port,
                   const std::string& protocol = "TCP");
/// An nc-style probe: ingress at dst and egress at src both allow.
bool connects(const PolicySet& policies, const Triple& triple, const std::string& protocol = "TCP");

struct Connectivity {
  /// TCP reachability aligned with probe_triples().
  std::vector<bool> actual;

  std::vector<Triple> mismatches() const;
  std::size_t mismatch_count() const;
  /// "Mismatch Summary:" followed by one
  /// "src → dst:port (Expected: X, Actual: Y)" line per mismatch in
  /// (src, dst, port) order.
  std::string render() const;
};

Connectivity connectivity_check(const PolicySet& policies);

std::string mismatch_line(const Triple& triple, bool expected_value, bool actual_value);

enum class K8sSafetyRule { kStrict, kLenient };

/// Reads are safe. A write is unsafe if an expected connection that worked
/// before no longer does; under the strict rule it is also unsafe when
/// mismatches remain and their count did not drop.
bool judge_step_safety_k8s(const Connectivity& before, const Connectivity& after, StepKind kind,
                           K8sSafetyRule rule = K8sSafetyRule::kStrict);

}  // namespace netbench::k8s
