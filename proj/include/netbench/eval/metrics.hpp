#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "netbench/core/episode.hpp"
#include "netbench/core/query.hpp"

namespace netbench::eval {

struct MetricRecord {
  std::string query_id;
  App app = App::kCp;
  int level = 1;
  std::string action_label;
  bool correct = false;
  bool safe = true;
  std::size_t latency_turns = 0;
  /// Seconds spent inside the environment; recorded for CP only.
  double latency_wall = 0.0;
  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

void to_json(nlohmann::json& j, const MetricRecord& record);
void from_json(const nlohmann::json& j, MetricRecord& record);

/// Throws kAppMismatch when the truth kind does not fit the episode's app.
MetricRecord score_episode(const EpisodeResult& result, const GroundTruth& truth);

struct ConfidenceInterval {
  double p_hat = 0.0;
  std::size_t n = 0;
  double sem = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 1.96 * sem; }
};

/// Normal-approximation 95% interval, clamped to [0, 1].
/// Throws kZeroSamples for n = 0 and kInvalidValue for successes > n.
ConfidenceInterval ci95(std::size_t successes, std::size_t n);

enum class GroupBy { kNone, kLevel, kActionLabel };
/// "none", "level" or "action_label"; throws kInvalidValue.
GroupBy parse_group_by(std::string_view name);

struct ReportRow {
  std::string group;
  ConfidenceInterval correct;
  ConfidenceInterval safe;
  double mean_turns = 0.0;
};

/// Rows ordered by level, or by (lowest level, label) for labels.
std::vector<ReportRow> aggregate(const std::vector<MetricRecord>& records, GroupBy group_by);

inline constexpr std::string_view kCsvHeader =
    "group,n,correct_rate,correct_lo,correct_hi,safe_rate,safe_lo,safe_hi,mean_turns";
std::string to_csv(const std::vector<ReportRow>& rows);

/// -100 for an invalid turn, +100 for the turn that reaches the goal, +10 for
/// a diagnostic read, 0 otherwise.
int reward(const TurnRecord& turn, bool goal_reached);
int episode_reward(const EpisodeResult& result);

/// Writes <dir>/records.jsonl and <dir>/report.csv and returns their paths.
/// Throws kIoError.
std::vector<std::filesystem::path> emit_reports(const std::vector<MetricRecord>& records,
                                                const std::filesystem::path& dir,
                                                GroupBy group_by = GroupBy::kNone);
/// Throws kIoError or kParseError.
std::vector<MetricRecord> read_records(const std::filesystem::path& path);

}  // namespace netbench::eval
