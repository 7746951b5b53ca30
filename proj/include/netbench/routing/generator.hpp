#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "netbench/core/episode.hpp"
#include "netbench/core/query.hpp"
#include "netbench/routing/pingall.hpp"
#include "netbench/routing/state.hpp"

namespace netbench::routing {

/// Level 1: DR, DI, RI, DT, WR. Level 2: DR+DI, DR+RI, DR+DT, DR+WR, RI+WR,
/// DT+WR, DI+DT. Level 3: DI+WR, RI+DT, DI+RI. Throws kInvalidValue otherwise.
const std::vector<std::string>& routing_labels(int level);

/// {"num_switches", "hosts_per_subnet", "prefix", "topology_seed"}.
nlohmann::json routing_environment(int num_switches, int hosts_per_subnet, const std::string& prefix,
                                   std::uint64_t topology_seed);
/// Throws kInvalidConfig on a malformed object, kParameterOutOfRange on bad sizes.
NetState build_network(const nlohmann::json& environment);

/// Samples a topology and the label's fault families, injects them in label
/// order, and keeps the sample only when pingall shows failures and the
/// recorded inverses admit an ordering that is safe at every step under the
/// strict rule. That ordering is stored as the repair.
QueryPair generate_routing_query(int level, std::uint64_t seed);

/// Multi-turn environment over the network model. Each command goes to the
/// named machine (router when omitted); writes are judged against the
/// previous pingall matrix.
class RoutingEnvironment : public Environment {
 public:
  explicit RoutingEnvironment(SafetyRule rule = SafetyRule::kStrict, PingOptions options = {})
      : rule_(rule), options_(options) {}

  App app() const override { return App::kRouting; }
  void reset(const QuerySpec& query, const GroundTruth& truth) override;
  std::string instructions() const override;
  std::string status() const override { return matrix_.render(); }
  StepOutcome step(const AgentMessage& message) override;
  bool goal_reached() const override { return matrix_.failures() == 0; }
  bool correct() const override { return goal_reached(); }
  std::string state_digest() const override { return digest(state_); }

  const NetState& state() const { return state_; }

 private:
  SafetyRule rule_;
  PingOptions options_;
  NetState state_;
  PingMatrix matrix_;
};

}  // namespace netbench::routing
