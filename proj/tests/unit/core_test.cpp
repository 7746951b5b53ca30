#include <gtest/gtest.h>

#include <set>

#include "netbench/core/action.hpp"
#include "netbench/core/batch.hpp"
#include "netbench/core/config.hpp"
#include "netbench/core/digest.hpp"
#include "netbench/core/episode.hpp"
#include "netbench/core/repair.hpp"
#include "netbench/core/seed.hpp"
#include "netbench/core/text.hpp"

namespace netbench {
namespace {

// A counter machine: inc/dec by one, dec below zero is rejected.
struct Counter {
  using State = int;
  static void validate(const ActionSpec& a) {
    if (a.name != "inc" && a.name != "dec") throw Error(ErrorCode::kUnknownAction, a.name);
    if (!a.operands.empty()) throw Error(ErrorCode::kArityMismatch, a.name);
  }
  static void apply(int& s, const ActionSpec& a) {
    if (a.name == "dec" && s == 0) throw Error(ErrorCode::kInvalidValue, "negative");
    s += a.name == "inc" ? 1 : -1;
  }
};

TEST(Seed, Mix64MatchesReferenceSplitMix) {
  // Reference values of the SplitMix64 finalizer applied to 0 + golden gamma.
  EXPECT_EQ(mix64(0x9E3779B97F4A7C15ULL), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(split_seed(0, 0), 0xE220A8397B1DCDAFULL);
}

TEST(Seed, SplitSeedsAreDistinctWithinBatch) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(split_seed(7, i));
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Seed, BelowStaysInRangeAndCoversIt) {
  Rng rng(3);
  std::set<std::size_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  for (int i = 0; i < 200; ++i) {
    const auto v = rng.between(-3, 3);
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
  }
}

TEST(Digest, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Text, ShellWords) {
  const auto words = text::shell_words("kubectl patch 'a b' \"c\\\"d\" e\\ f");
  ASSERT_TRUE(words);
  EXPECT_EQ(*words, (std::vector<std::string>{"kubectl", "patch", "a b", "c\"d", "e f"}));
  EXPECT_FALSE(text::shell_words("echo 'open"));
  EXPECT_EQ(text::split_lines("a\r\nb\n"), (std::vector<std::string>{"a", "b"}));
}

TEST(Compose, EmptyProgramIsIdentity) {
  EXPECT_EQ(compose_actions<Counter>(5, {}), 5);
}

TEST(Compose, LeftToRight) {
  const std::vector<ActionSpec> program{{"inc", {}}, {"inc", {}}, {"dec", {}}};
  EXPECT_EQ(compose_actions<Counter>(0, program), 1);
}

TEST(Compose, ErrorsCarryIndexAndCode) {
  const std::vector<ActionSpec> unknown{{"inc", {}}, {"jump", {}}};
  try {
    compose_actions<Counter>(0, unknown);
    FAIL();
  } catch (const CompositionError& e) {
    EXPECT_EQ(e.index(), 1u);
    EXPECT_EQ(e.code(), ErrorCode::kUnknownAction);
  }
  const std::vector<ActionSpec> arity{{"inc", {"x"}}};
  try {
    compose_actions<Counter>(0, arity);
    FAIL();
  } catch (const CompositionError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kArityMismatch);
  }
  const std::vector<ActionSpec> rejected{{"inc", {}}, {"dec", {}}, {"dec", {}}};
  try {
    compose_actions<Counter>(0, rejected);
    FAIL();
  } catch (const CompositionError& e) {
    EXPECT_EQ(e.index(), 2u);
    EXPECT_EQ(e.code(), ErrorCode::kApplicationRejected);
  }
}

TEST(Config, ParsesAllKeysAndSection) {
  const auto config = parse_config(
      "app = routing\nnum_queries = 12\nlevels = 3, 1\nseed = 9\nmax_turns = 5\n"
      "agent = noop\nparallelism = 2\n[routing]\nmin_switches = 3\n");
  EXPECT_EQ(config.app, App::kRouting);
  EXPECT_EQ(config.num_queries, 12u);
  EXPECT_EQ(config.levels, (std::vector<int>{1, 3}));
  EXPECT_EQ(config.seed, 9u);
  EXPECT_EQ(config.max_turns, 5u);
  EXPECT_EQ(config.agent, "noop");
  EXPECT_EQ(config.parallelism, 2u);
  EXPECT_EQ(param_int(config.app_params, "min_switches", 2), 3);
  EXPECT_EQ(param_int(config.app_params, "absent", 4), 4);
}

TEST(Config, RejectsBadInput) {
  auto code_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kUnknownNode;  // sentinel: no error
  };
  EXPECT_EQ(code_of("app = dns\n"), ErrorCode::kUnknownApp);
  EXPECT_EQ(code_of("app = cp\nlevels = \n"), ErrorCode::kEmptyLevelSet);
  EXPECT_EQ(code_of("app = cp\nnum_queries = 0\n"), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of("app = cp\nmax_turns = 0\n"), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of("app = cp\ncolour = red\n"), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of("num_queries = 3\n"), ErrorCode::kInvalidConfig);
}

TEST(Query, JsonRoundTrip) {
  QueryPair pair;
  pair.query = {"routing-000004", App::kRouting, 2, "DR+DI", "fix it", 42, {{"prefix", "p1_"}}};
  pair.truth.kind = TruthKind::kRecoveryPredicate;
  pair.truth.target_digest = "abc";
  pair.truth.hidden_injection = {{"inject", {"DR", "1"}}};
  pair.truth.repair = {{"exec", {"r0", "sysctl -w net.ipv4.ip_forward=1"}}};
  const auto back = nlohmann::json(pair).get<QueryPair>();
  EXPECT_EQ(back, pair);
}

TEST(Query, TruthInvariants) {
  GroundTruth t;
  t.kind = TruthKind::kActionProgram;
  EXPECT_THROW(validate(t), Error);
  t.program = {{"list", {"ju1"}}};
  t.target_digest = "d";
  EXPECT_NO_THROW(validate(t));
  t.hidden_injection = {{"x", {}}};
  EXPECT_THROW(validate(t), Error);
}

TEST(Batch, QueryIdsSortInIndexOrder) {
  EXPECT_EQ(query_id(App::kK8s, 7), "k8s-000007");
  EXPECT_LT(query_id(App::kCp, 99), query_id(App::kCp, 100));
}

TEST(Batch, LevelsCycleAndParallelismDoesNotChangeOutput) {
  AppDriver driver;
  driver.app = App::kCp;
  driver.generate = [](int level, std::uint64_t seed) {
    QueryPair p;
    p.query.level = level;
    p.query.seed = seed;
    p.truth.program = {{"list", {"x"}}};
    return p;
  };
  BenchmarkConfig config;
  config.num_queries = 50;
  config.levels = {1, 3};
  config.seed = 11;
  const auto serial = generate_batch(config, driver);
  config.parallelism = 4;
  const auto parallel = generate_batch(config, driver);
  ASSERT_EQ(serial.size(), 50u);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(serial[0].query.level, 1);
  EXPECT_EQ(serial[1].query.level, 3);
  EXPECT_EQ(serial[5].query.seed, split_seed(11, 5));
  EXPECT_EQ(serial[5].query.id, "cp-000005");
}

TEST(Repair, FindsSafeInterleaving) {
  // State is a pair of counters; a step is safe unless it makes either negative.
  using S = std::pair<int, int>;
  const std::vector<std::vector<ActionSpec>> groups{
      {{"a-", {}}, {"a+", {}}, {"a+", {}}},
      {{"b+", {}}},
  };
  auto apply = [](S& s, const ActionSpec& a) {
    int& v = a.name[0] == 'a' ? s.first : s.second;
    v += a.name[1] == '+' ? 1 : -1;
    return true;
  };
  auto safe = [](const S&, const S& after) { return after.first >= 0 && after.second >= 0; };
  auto digest = [](const S& s) { return std::to_string(s.first) + "," + std::to_string(s.second); };
  const auto order = find_safe_ordering(S{1, 0}, groups, apply, safe, digest, "2,1");
  ASSERT_TRUE(order);
  EXPECT_EQ(order->size(), 4u);
  EXPECT_FALSE(find_safe_ordering(S{0, 0}, groups, apply, safe, digest, "1,1"));
}

// Environment whose goal is reached once "fix" is executed.
class ToyEnv : public Environment {
 public:
  App app() const override { return App::kRouting; }
  void reset(const QuerySpec&, const GroundTruth&) override { fixed_ = false; }
  std::string instructions() const override { return "toy"; }
  std::string status() const override { return fixed_ ? "ok" : "broken"; }
  StepOutcome step(const AgentMessage& m) override {
    if (m.command == "look") return {StepKind::kRead, "looked", true, false};
    if (m.command == "break") return {StepKind::kWrite, "broke more", false, false};
    if (m.command == "fix") {
      fixed_ = true;
      return {StepKind::kWrite, "fixed", true, true};
    }
    return {StepKind::kInvalid, "unknown", true, false};
  }
  bool goal_reached() const override { return fixed_; }
  bool correct() const override { return fixed_; }
  std::string state_digest() const override { return fixed_ ? "good" : "bad"; }

 private:
  bool fixed_ = false;
};

class ScriptAgent : public Agent {
 public:
  explicit ScriptAgent(std::vector<std::string> script) : script_(std::move(script)) {}
  AgentReply next(const QuerySpec&, const Observation& obs) override {
    history_sizes.push_back(obs.history.size());
    AgentReply r;
    const std::string cmd = i_ < script_.size() ? script_[i_++] : "look";
    if (cmd == "garbage") {
      r.raw = "no json here";
      r.error = "no JSON object found";
      return r;
    }
    r.message = AgentMessage{MessageKind::kCommand, "r0", cmd, {}, {}};
    return r;
  }
  std::vector<std::size_t> history_sizes;

 private:
  std::vector<std::string> script_;
  std::size_t i_ = 0;
};

TEST(Episode, StopsAtGoalAndFoldsSafety) {
  ToyEnv env;
  ScriptAgent agent({"look", "garbage", "break", "fix", "look"});
  QuerySpec q;
  q.app = App::kRouting;
  const auto r = run_episode(env, agent, q, {}, {});
  EXPECT_EQ(r.latency_turns, 4u);
  EXPECT_TRUE(r.correct);
  EXPECT_FALSE(r.safe);
  EXPECT_EQ(r.step_safety, (std::vector<bool>{true, true, false, true}));
  EXPECT_EQ(r.turns[1].kind, StepKind::kInvalid);
  EXPECT_EQ(agent.history_sizes, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(r.safe, fold_safety(r.step_safety));
}

TEST(Episode, TurnBudgetIsRespected) {
  ToyEnv env;
  ScriptAgent agent({"look"});
  QuerySpec q;
  q.app = App::kRouting;
  RunOptions options;
  options.max_turns = 1;
  const auto r = run_episode(env, agent, q, {}, options);
  EXPECT_EQ(r.latency_turns, 1u);
  EXPECT_FALSE(r.correct);
  EXPECT_TRUE(r.safe);
}

TEST(Episode, TranscriptIsCapped) {
  ToyEnv env;
  ScriptAgent agent({});
  QuerySpec q;
  q.app = App::kRouting;
  RunOptions options;
  options.max_turns = 10;
  options.max_transcript_bytes = 40;
  const auto r = run_episode(env, agent, q, {}, options);
  EXPECT_EQ(r.turns.back().observation, "[transcript truncated]");
  const auto back = nlohmann::json(r).get<EpisodeResult>();
  EXPECT_EQ(back.turns.size(), r.turns.size());
  EXPECT_EQ(back.step_safety, r.step_safety);
}

}  // namespace
}  // namespace netbench
