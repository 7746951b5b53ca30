#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netbench/agents/prompt.hpp"
#include "netbench/core/episode.hpp"
#include "netbench/core/query.hpp"

namespace netbench::agents {

/// Replays the ground truth: the recorded repair for reactive queries, one
/// program answer for constructive ones. Submits "done" once the repair is
/// exhausted. Throws kMissingInverse when there is nothing to replay.
class OracleAgent : public Agent {
 public:
  explicit OracleAgent(GroundTruth truth);
  AgentReply next(const QuerySpec& query, const Observation& observation) override;

 private:
  GroundTruth truth_;
  std::size_t cursor_ = 0;
};

/// Submits "no action" immediately.
class NoopAgent : public Agent {
 public:
  AgentReply next(const QuerySpec& query, const Observation& observation) override;
};

/// Samples well-formed commands from the app's grammar. The stream depends
/// only on (seed, query seed), so transcripts repeat across runs.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : seed_(seed) {}
  AgentReply next(const QuerySpec& query, const Observation& observation) override;

 private:
  std::uint64_t seed_;
};

/// First breaks something that currently works, then undoes it, then plays
/// the oracle repair. Reactive apps only; throws kAppMismatch otherwise.
class AdversarialAgent : public Agent {
 public:
  explicit AdversarialAgent(GroundTruth truth);
  AgentReply next(const QuerySpec& query, const Observation& observation) override;

 private:
  GroundTruth truth_;
  std::vector<AgentMessage> script_;
  std::size_t cursor_ = 0;
  bool planned_ = false;
};

/// Shared wire handling for agents reached over a transport. Each turn sends
/// {"query_id", "prompt"} and parses the reply with extract_message.
/// Timeouts and transport failures become error replies; `fatal()` reports
/// a transport that can no longer be used.
class ExternalAgent : public Agent {
 public:
  explicit ExternalAgent(std::chrono::milliseconds timeout, PromptStyle style)
      : timeout_(timeout), style_(style) {}
  AgentReply next(const QuerySpec& query, const Observation& observation) override;
  const std::optional<std::string>& fatal() const { return fatal_; }

 protected:
  /// Returns the raw reply text; throws kTimeout or kTransportError.
  virtual std::string exchange(const std::string& request_line) = 0;
  std::chrono::milliseconds timeout_;

 private:
  PromptStyle style_;
  std::optional<std::string> fatal_;
};

/// Child process speaking line-delimited JSON over stdin/stdout. `command`
/// runs under /bin/sh -c. Throws kTransportError when it cannot be started.
class ExecAgent : public ExternalAgent {
 public:
  ExecAgent(const std::string& command, std::chrono::milliseconds timeout,
            PromptStyle style = PromptStyle::kPlain);
  ~ExecAgent() override;
  ExecAgent(const ExecAgent&) = delete;
  ExecAgent& operator=(const ExecAgent&) = delete;

 protected:
  std::string exchange(const std::string& request_line) override;

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// POSTs the request as the body to an http:// URL; the response body is
/// the reply.
class HttpAgent : public ExternalAgent {
 public:
  HttpAgent(const std::string& url, std::chrono::milliseconds timeout,
            PromptStyle style = PromptStyle::kPlain);

 protected:
  std::string exchange(const std::string& request_line) override;

 private:
  std::string origin_;
  std::string path_;
};

inline constexpr std::chrono::milliseconds kDefaultAgentTimeout{120000};

/// "oracle", "noop", "random", "adversarial", "exec:<command>" or
/// "http://..." (an optional "http:" prefix before the URL is accepted).
/// An empty spec falls back to $NETBENCH_AGENT, then "oracle".
/// Throws kInvalidConfig for an unknown spec, kTransportError when a process
/// cannot be started.
std::unique_ptr<Agent> make_agent(const std::string& spec, const QueryPair& pair, std::uint64_t seed = 0,
                                  std::chrono::milliseconds timeout = kDefaultAgentTimeout,
                                  PromptStyle style = PromptStyle::kPlain);

/// Resolves the empty spec as make_agent does.
std::string resolve_agent_spec(const std::string& spec);

}  // namespace netbench::agents
