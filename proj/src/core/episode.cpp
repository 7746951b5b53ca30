#include "netbench/core/episode.hpp"

#include <algorithm>
#include <chrono>
#include <exception>

#include "netbench/core/error.hpp"

namespace netbench {

namespace {

constexpr std::string_view kTruncated = "[transcript truncated]";

std::string capped(std::string text, std::size_t& budget) {
  if (text.size() <= budget) {
    budget -= text.size();
    return text;
  }
  budget = 0;
  return std::string(kTruncated);
}

}  // namespace

std::string to_wire(const AgentMessage& message) {
  nlohmann::json j;
  if (message.kind == MessageKind::kFinalAnswer) {
    j["final_answer"] = message.answer;
  } else {
    j["machine"] = message.machine.value_or("");
    j["command"] = message.command;
  }
  return j.dump();
}

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::kInvalid: return "invalid";
    case StepKind::kRead: return "read";
    case StepKind::kWrite: return "write";
    case StepKind::kFinalAnswer: return "final";
  }
  return "invalid";
}

StepKind parse_step_kind(std::string_view text) {
  if (text == "read") return StepKind::kRead;
  if (text == "write") return StepKind::kWrite;
  if (text == "final") return StepKind::kFinalAnswer;
  if (text == "invalid") return StepKind::kInvalid;
  throw Error(ErrorCode::kParseError, "unknown step kind '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const TurnRecord& turn) {
  j = nlohmann::json{{"agent_message", turn.agent_message},
                     {"observation", turn.observation},
                     {"kind", to_string(turn.kind)},
                     {"safe", turn.safe},
                     {"goal_reached", turn.goal_reached}};
}

void from_json(const nlohmann::json& j, TurnRecord& turn) {
  j.at("agent_message").get_to(turn.agent_message);
  j.at("observation").get_to(turn.observation);
  turn.kind = parse_step_kind(j.at("kind").get<std::string>());
  j.at("safe").get_to(turn.safe);
  j.at("goal_reached").get_to(turn.goal_reached);
}

void to_json(nlohmann::json& j, const EpisodeResult& result) {
  j = nlohmann::json{{"query_id", result.query_id},
                     {"app", to_string(result.app)},
                     {"level", result.level},
                     {"action_label", result.action_label},
                     {"turns", result.turns},
                     {"final_state_digest", result.final_state_digest},
                     {"correct", result.correct},
                     {"safe", result.safe},
                     {"step_safety", result.step_safety},
                     {"latency_turns", result.latency_turns},
                     {"latency_wall", result.latency_wall}};
}

void from_json(const nlohmann::json& j, EpisodeResult& result) {
  j.at("query_id").get_to(result.query_id);
  result.app = parse_app(j.at("app").get<std::string>());
  j.at("level").get_to(result.level);
  j.at("action_label").get_to(result.action_label);
  j.at("turns").get_to(result.turns);
  j.at("final_state_digest").get_to(result.final_state_digest);
  j.at("correct").get_to(result.correct);
  j.at("safe").get_to(result.safe);
  j.at("step_safety").get_to(result.step_safety);
  j.at("latency_turns").get_to(result.latency_turns);
  j.at("latency_wall").get_to(result.latency_wall);
}

bool fold_safety(const std::vector<bool>& step_safety) {
  return std::all_of(step_safety.begin(), step_safety.end(), [](bool s) { return s; });
}

EpisodeResult run_episode(Environment& env, Agent& agent, const QuerySpec& query,
                          const GroundTruth& truth, const RunOptions& options) {
  if (env.app() != query.app) {
    throw Error(ErrorCode::kAppMismatch, "environment does not serve app " +
                                             std::string(to_string(query.app)));
  }
  env.reset(query, truth);

  EpisodeResult result;
  result.query_id = query.id;
  result.app = query.app;
  result.level = query.level;
  result.action_label = query.action_label;

  Observation observation;
  observation.prompt_header = env.instructions();
  observation.system_status = env.status();

  std::size_t budget = options.max_transcript_bytes;
  double env_seconds = 0.0;

  for (std::size_t turn = 0; turn < options.max_turns; ++turn) {
    if (env.goal_reached()) break;

    AgentReply reply;
    try {
      reply = agent.next(query, observation);
    } catch (const Error& e) {
      reply.error = e.what();
    } catch (const std::exception& e) {
      reply.error = std::string("agent failure: ") + e.what();
    }

    StepOutcome outcome;
    std::string message_text;
    bool terminal = false;
    if (!reply.message) {
      message_text = reply.raw;
      outcome.kind = StepKind::kInvalid;
      outcome.output = "AgentProtocolError: " + reply.error;
    } else {
      const AgentMessage& message = *reply.message;
      message_text = to_wire(message);
      const auto start = std::chrono::steady_clock::now();
      try {
        outcome = env.step(message);
      } catch (const std::exception& e) {
        // Environments are required to reject input gracefully; this is the
        // backstop so a defect never takes down a whole batch.
        outcome = StepOutcome{StepKind::kInvalid, std::string("error: ") + e.what(), true, false};
      }
      env_seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (!message.warning.empty()) outcome.output = message.warning + "\n" + outcome.output;
      terminal = message.kind == MessageKind::kFinalAnswer;
    }

    result.step_safety.push_back(outcome.safe);
    TurnRecord record{capped(message_text, budget), capped(outcome.output, budget), outcome.kind,
                      outcome.safe, outcome.goal_reached};
    observation.history.emplace_back(message_text, outcome.output);
    observation.system_status = env.status();
    result.turns.push_back(std::move(record));
    if (outcome.goal_reached || terminal) break;
  }

  result.latency_turns = result.turns.size();
  result.latency_wall = env_seconds;
  result.final_state_digest = env.state_digest();
  result.correct = env.correct();
  result.safe = fold_safety(result.step_safety);
  return result;
}

}  // namespace netbench
