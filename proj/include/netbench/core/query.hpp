#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "netbench/core/action.hpp"

namespace netbench {

enum class App { kCp, kRouting, kK8s };

std::string_view to_string(App app);
/// Throws kUnknownApp.
App parse_app(std::string_view name);

/// A generated benchmark query. `environment` holds the parameters needed to
/// rebuild the initial state (topology size, name prefix, ...) so a persisted
/// query is self-contained.
struct QuerySpec {
  std::string id;
  App app = App::kCp;
  int level = 1;
  std::string action_label;
  std::string prompt_text;
  std::uint64_t seed = 0;
  nlohmann::json environment = nlohmann::json::object();

  friend bool operator==(const QuerySpec&, const QuerySpec&) = default;
};

enum class TruthKind { kActionProgram, kRecoveryPredicate };

/// Executable target for a query.
///
/// Constructive queries carry the action program A* and the digest of the
/// state it produces. Reactive queries carry the hidden injection sequence,
/// the digest of the healthy pre-injection state, and `repair`: the recorded
/// inverse of the injection, ordered so that every step is judged safe.
struct GroundTruth {
  TruthKind kind = TruthKind::kActionProgram;
  std::vector<ActionSpec> program;
  std::string target_digest;
  std::vector<ActionSpec> hidden_injection;
  std::vector<ActionSpec> repair;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Checks the kind-dependent shape invariants; throws kInvariantViolation.
void validate(const GroundTruth& truth);

struct QueryPair {
  QuerySpec query;
  GroundTruth truth;

  friend bool operator==(const QueryPair&, const QueryPair&) = default;
};

void to_json(nlohmann::json& j, const QuerySpec& query);
void from_json(const nlohmann::json& j, QuerySpec& query);
void to_json(nlohmann::json& j, const GroundTruth& truth);
void from_json(const nlohmann::json& j, GroundTruth& truth);
void to_json(nlohmann::json& j, const QueryPair& pair);
void from_json(const nlohmann::json& j, QueryPair& pair);

}  // namespace netbench
