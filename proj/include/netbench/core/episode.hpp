#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "netbench/core/query.hpp"

namespace netbench {

enum class MessageKind { kCommand, kFinalAnswer };

/// One agent turn. Routing and K8s agents send exactly one command per turn;
/// CP agents send a final answer holding an action program or a typed value.
struct AgentMessage {
  MessageKind kind = MessageKind::kCommand;
  std::optional<std::string> machine;
  std::string command;
  nlohmann::json answer;
  /// Set by the reply parser when it had to discard part of the reply.
  std::string warning;
};

/// Wire form: {"machine": ..., "command": ...} or {"final_answer": ...}.
std::string to_wire(const AgentMessage& message);

/// What the agent sees before each turn.
struct Observation {
  std::string prompt_header;
  std::string system_status;
  std::vector<std::pair<std::string, std::string>> history;
};

/// Either a parsed message or a protocol error with the raw reply text.
struct AgentReply {
  std::optional<AgentMessage> message;
  std::string raw;
  std::string error;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentReply next(const QuerySpec& query, const Observation& observation) = 0;
};

enum class StepKind { kInvalid, kRead, kWrite, kFinalAnswer };

std::string_view to_string(StepKind kind);
StepKind parse_step_kind(std::string_view text);

struct StepOutcome {
  StepKind kind = StepKind::kInvalid;
  std::string output;
  bool safe = true;
  bool goal_reached = false;
};

/// An application environment confined to one episode at a time.
///
/// `reset` rebuilds s_0 (constructive) or s_faulty (reactive) from the
/// query's environment parameters and the truth's hidden injection. `step`
/// must never throw on agent input: malformed or forbidden commands come back
/// as kInvalid outcomes with a diagnostic string.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual App app() const = 0;
  virtual void reset(const QuerySpec& query, const GroundTruth& truth) = 0;
  virtual std::string instructions() const = 0;
  virtual std::string status() const = 0;
  virtual StepOutcome step(const AgentMessage& message) = 0;
  virtual bool goal_reached() const = 0;
  /// Application-specific state equivalence against the target.
  virtual bool correct() const = 0;
  virtual std::string state_digest() const = 0;
};

struct TurnRecord {
  std::string agent_message;
  std::string observation;
  StepKind kind = StepKind::kInvalid;
  bool safe = true;
  bool goal_reached = false;
};

struct EpisodeResult {
  std::string query_id;
  App app = App::kCp;
  int level = 1;
  std::string action_label;
  std::vector<TurnRecord> turns;
  std::string final_state_digest;
  bool correct = false;
  bool safe = true;
  std::vector<bool> step_safety;
  std::size_t latency_turns = 0;
  double latency_wall = 0.0;
};

void to_json(nlohmann::json& j, const TurnRecord& turn);
void from_json(const nlohmann::json& j, TurnRecord& turn);
void to_json(nlohmann::json& j, const EpisodeResult& result);
void from_json(const nlohmann::json& j, EpisodeResult& result);

/// Conjunction of per-step safety; true for an empty list.
bool fold_safety(const std::vector<bool>& step_safety);

struct RunOptions {
  std::size_t max_turns = 20;
  /// Transcript text budget per episode; later turn texts are replaced by a
  /// truncation marker once it is spent.
  std::size_t max_transcript_bytes = 256 * 1024;
};

/// Runs observe → act → execute until the goal is reached, the agent submits a
/// final answer, or the turn budget is exhausted.
EpisodeResult run_episode(Environment& env, Agent& agent, const QuerySpec& query,
                          const GroundTruth& truth, const RunOptions& options);

}  // namespace netbench
