#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netbench/core/action.hpp"
#include "netbench/core/episode.hpp"
#include "netbench/core/query.hpp"
#include "netbench/k8s/connectivity.hpp"
#include "netbench/k8s/policy.hpp"

namespace netbench::k8s {

/// Level 1: RI, AI, CP, CPR, AE. Level 2: RI+AI, RI+CP, RI+CPR, AI+CP,
/// AI+CPR, CP+CPR. Level 3: CP+AE, CPR+AE, RI+AE, AI+AE.
/// Throws kInvalidValue otherwise.
const std::vector<std::string>& k8s_labels(int level);

/// Policy mutations and raw kubectl commands as actions.
///
///   remove_ingress(policy, rule, peer|"-")      "-" drops the whole rule
///   add_ingress(policy, app)                     new rule, any port
///   change_port(policy, ingress|egress, rule, port, new_port)
///   change_protocol(policy, ingress|egress, rule, port)   TCP <-> UDP
///   add_egress(policy, app)                      new rule, any port
///   exec(command)                                must be a kubectl write
struct K8sSystem {
  using State = PolicySet;
  static void validate(const ActionSpec& action);
  static void apply(State& state, const ActionSpec& action);
};

/// Action name for a family code; throws kUnknownLabel.
std::string mutation_name(const std::string& family);

struct PolicyInjection {
  ActionSpec action;
  /// Policy the mutation touched and its content beforehand.
  NetworkPolicy original;
};

/// Samples one effective mutation of `family` on `policies`, skipping
/// `exclude`d policy names. Throws kUnknownLabel or kIneffectiveInjection.
PolicyInjection inject_policy_error(const PolicySet& policies, const std::string& family, std::uint64_t seed,
                                    const std::vector<std::string>& exclude = {});

/// `kubectl apply -f - <<EOF` restoring `policy`.
std::string apply_command(const NetworkPolicy& policy);

/// Mutates one policy per family in the label, each effective alone and
/// jointly leaving mismatches. The repair reapplies each touched policy in an
/// order that is safe at every step under the strict rule.
QueryPair generate_k8s_query(int level, std::uint64_t seed);

class K8sEnvironment : public Environment {
 public:
  explicit K8sEnvironment(K8sSafetyRule rule = K8sSafetyRule::kStrict) : rule_(rule) {}

  App app() const override { return App::kK8s; }
  void reset(const QuerySpec& query, const GroundTruth& truth) override;
  std::string instructions() const override;
  std::string status() const override { return connectivity_.render(); }
  StepOutcome step(const AgentMessage& message) override;
  bool goal_reached() const override { return connectivity_.mismatch_count() == 0; }
  bool correct() const override { return goal_reached(); }
  std::string state_digest() const override { return digest(policies_); }

  const PolicySet& policies() const { return policies_; }

 private:
  K8sSafetyRule rule_;
  PolicySet policies_;
  Connectivity connectivity_;
};

}  // namespace netbench::k8s
