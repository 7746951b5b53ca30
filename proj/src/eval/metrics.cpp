#include "netbench/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>

#include "netbench/core/error.hpp"

namespace netbench::eval {

void to_json(nlohmann::json& j, const MetricRecord& r) {
  j = {{"query_id", r.query_id},
       {"app", to_string(r.app)},
       {"level", r.level},
       {"action_label", r.action_label},
       {"correct", r.correct},
       {"safe", r.safe},
       {"latency_turns", r.latency_turns},
       {"latency_wall", r.latency_wall}};
}

void from_json(const nlohmann::json& j, MetricRecord& r) {
  r.query_id = j.at("query_id").get<std::string>();
  r.app = parse_app(j.at("app").get<std::string>());
  r.level = j.at("level").get<int>();
  r.action_label = j.at("action_label").get<std::string>();
  r.correct = j.at("correct").get<bool>();
  r.safe = j.at("safe").get<bool>();
  r.latency_turns = j.at("latency_turns").get<std::size_t>();
  r.latency_wall = j.value("latency_wall", 0.0);
}

MetricRecord score_episode(const EpisodeResult& result, const GroundTruth& truth) {
  const bool constructive = truth.kind == TruthKind::kActionProgram;
  if (constructive != (result.app == App::kCp)) {
    throw Error(ErrorCode::kAppMismatch, std::string("truth kind does not fit app ") + std::string(to_string(result.app)));
  }
  MetricRecord r;
  r.query_id = result.query_id;
  r.app = result.app;
  r.level = result.level;
  r.action_label = result.action_label;
  r.correct = result.correct;
  r.safe = fold_safety(result.step_safety);
  r.latency_turns = result.latency_turns;
  r.latency_wall = constructive ? result.latency_wall : 0.0;
  return r;
}

ConfidenceInterval ci95(std::size_t successes, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kZeroSamples, "confidence interval over zero samples");
  if (successes > n) throw Error(ErrorCode::kInvalidValue, "more successes than samples");
  ConfidenceInterval ci;
  ci.n = n;
  ci.p_hat = static_cast<double>(successes) / static_cast<double>(n);
  ci.sem = std::sqrt(ci.p_hat * (1.0 - ci.p_hat) / static_cast<double>(n));
  ci.lo = std::max(0.0, ci.p_hat - ci.half_width());
  ci.hi = std::min(1.0, ci.p_hat + ci.half_width());
  return ci;
}

GroupBy parse_group_by(std::string_view name) {
  if (name == "none") return GroupBy::kNone;
  if (name == "level") return GroupBy::kLevel;
  if (name == "action_label" || name == "label") return GroupBy::kActionLabel;
  throw Error(ErrorCode::kInvalidValue, "group-by must be none, level or action_label");
}

std::vector<ReportRow> aggregate(const std::vector<MetricRecord>& records, GroupBy group_by) {
  struct Tally {
    int level = 0;
    std::size_t n = 0, correct = 0, safe = 0, turns = 0;
  };
  std::map<std::string, Tally> tallies;
  for (const auto& r : records) {
    const std::string key = group_by == GroupBy::kLevel         ? std::to_string(r.level)
                            : group_by == GroupBy::kActionLabel ? r.action_label
                                                                : std::string("all");
    auto [it, fresh] = tallies.try_emplace(key);
    Tally& t = it->second;
    t.level = fresh ? r.level : std::min(t.level, r.level);
    ++t.n;
    t.correct += r.correct;
    t.safe += r.safe;
    t.turns += r.latency_turns;
  }
  std::vector<std::pair<std::string, Tally>> ordered(tallies.begin(), tallies.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return std::tie(a.second.level, a.first) < std::tie(b.second.level, b.first);
  });
  std::vector<ReportRow> rows;
  for (const auto& [key, t] : ordered) {
    rows.push_back({key, ci95(t.correct, t.n), ci95(t.safe, t.n),
                    static_cast<double>(t.turns) / static_cast<double>(t.n)});
  }
  return rows;
}

std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string out(kCsvHeader);
  out += "\n";
  char line[512];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), ",%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.4f\n", r.correct.n, r.correct.p_hat,
                  r.correct.lo, r.correct.hi, r.safe.p_hat, r.safe.lo, r.safe.hi, r.mean_turns);
    out += r.group + line;
  }
  return out;
}

int reward(const TurnRecord& turn, bool goal_reached) {
  if (turn.kind == StepKind::kInvalid) return -100;
  if (goal_reached) return 100;
  return turn.kind == StepKind::kRead ? 10 : 0;
}

int episode_reward(const EpisodeResult& result) {
  int total = 0;
  bool reached = false;
  for (const auto& t : result.turns) {
    total += reward(t, t.goal_reached && !reached);
    reached = reached || t.goal_reached;
  }
  return total;
}

std::vector<std::filesystem::path> emit_reports(const std::vector<MetricRecord>& records,
                                                const std::filesystem::path& dir, GroupBy group_by) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto jsonl = dir / "records.jsonl";
  const auto csv = dir / "report.csv";
  {
    std::ofstream out(jsonl, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + jsonl.string());
    for (const auto& r : records) out << nlohmann::json(r).dump() << '\n';
    if (!out) throw Error(ErrorCode::kIoError, "write failed for " + jsonl.string());
  }
  std::ofstream out(csv, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + csv.string());
  out << (records.empty() ? std::string(kCsvHeader) + "\n" : to_csv(aggregate(records, group_by)));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + csv.string());
  return {jsonl, csv};
}

std::vector<MetricRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<MetricRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line).get<MetricRecord>());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace netbench::eval
