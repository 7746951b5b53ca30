#include "netbench/core/query.hpp"

#include "netbench/core/error.hpp"

namespace netbench {

std::string_view to_string(App app) {
  switch (app) {
    case App::kCp: return "cp";
    case App::kRouting: return "routing";
    case App::kK8s: return "k8s";
  }
  return "unknown";
}

App parse_app(std::string_view name) {
  if (name == "cp") return App::kCp;
  if (name == "routing") return App::kRouting;
  if (name == "k8s") return App::kK8s;
  throw Error(ErrorCode::kUnknownApp, "unknown application '" + std::string(name) + "'");
}

void validate(const GroundTruth& truth) {
  if (truth.kind == TruthKind::kActionProgram) {
    if (truth.program.empty()) {
      throw Error(ErrorCode::kInvariantViolation, "action-program truth with empty program");
    }
    if (!truth.hidden_injection.empty()) {
      throw Error(ErrorCode::kInvariantViolation, "action-program truth with hidden injection");
    }
  } else {
    if (truth.hidden_injection.empty()) {
      throw Error(ErrorCode::kInvariantViolation, "recovery-predicate truth without injection");
    }
    if (!truth.program.empty()) {
      throw Error(ErrorCode::kInvariantViolation, "recovery-predicate truth with a program");
    }
  }
  if (truth.target_digest.empty()) {
    throw Error(ErrorCode::kInvariantViolation, "ground truth without target digest");
  }
}

void to_json(nlohmann::json& j, const QuerySpec& query) {
  j = nlohmann::json{{"id", query.id},
                     {"app", to_string(query.app)},
                     {"level", query.level},
                     {"action_label", query.action_label},
                     {"prompt_text", query.prompt_text},
                     {"seed", query.seed},
                     {"environment", query.environment}};
}

void from_json(const nlohmann::json& j, QuerySpec& query) {
  j.at("id").get_to(query.id);
  query.app = parse_app(j.at("app").get<std::string>());
  j.at("level").get_to(query.level);
  j.at("action_label").get_to(query.action_label);
  j.at("prompt_text").get_to(query.prompt_text);
  j.at("seed").get_to(query.seed);
  query.environment = j.value("environment", nlohmann::json::object());
}

void to_json(nlohmann::json& j, const GroundTruth& truth) {
  j = nlohmann::json{
      {"kind", truth.kind == TruthKind::kActionProgram ? "action-program" : "recovery-predicate"},
      {"program", truth.program},
      {"target_digest", truth.target_digest},
      {"hidden_injection", truth.hidden_injection},
      {"repair", truth.repair}};
}

void from_json(const nlohmann::json& j, GroundTruth& truth) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "action-program") {
    truth.kind = TruthKind::kActionProgram;
  } else if (kind == "recovery-predicate") {
    truth.kind = TruthKind::kRecoveryPredicate;
  } else {
    throw Error(ErrorCode::kParseError, "unknown ground-truth kind '" + kind + "'");
  }
  truth.program = j.value("program", std::vector<ActionSpec>{});
  j.at("target_digest").get_to(truth.target_digest);
  truth.hidden_injection = j.value("hidden_injection", std::vector<ActionSpec>{});
  truth.repair = j.value("repair", std::vector<ActionSpec>{});
}

void to_json(nlohmann::json& j, const QueryPair& pair) {
  j = nlohmann::json{{"query", pair.query}, {"truth", pair.truth}};
}

void from_json(const nlohmann::json& j, QueryPair& pair) {
  j.at("query").get_to(pair.query);
  j.at("truth").get_to(pair.truth);
}

}  // namespace netbench
