#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "netbench/core/episode.hpp"
#include "netbench/core/query.hpp"
#include "netbench/cp/graph.hpp"
#include "netbench/cp/ops.hpp"
#include "netbench/cp/topology.hpp"

namespace netbench::cp {

/// Level 1: remove, rank, list, add. Level 2: remove-count, remove-list,
/// remove-rank. Level 3: add-count, add-list, add-rank. Throws kInvalidValue
/// for other levels.
const std::vector<std::string>& cp_labels(int level);

/// QuerySpec.environment forms that rebuild s_0:
///   {"source": "synthetic", "spec": {...TopologySpec fields}, "topology_seed": n}
///   {"source": "fixture", "path": "..."}
nlohmann::json synthetic_environment(const TopologySpec& spec, std::uint64_t topology_seed);
nlohmann::json fixture_environment(const std::filesystem::path& path);
/// Throws kInvalidConfig for an unrecognized form.
CpGraph build_graph(const nlohmann::json& environment);

/// Samples a label for `level`, draws operands uniformly from eligible nodes
/// and renders the prompt. The query's id and environment are left for the
/// caller. Throws kNoEligibleOperand when the graph is too small.
QueryPair generate_cp_query(const CpGraph& graph, int level, std::uint64_t seed);

/// One {"prompt", "program"} JSON object per line. Throws kAppMismatch for a
/// reactive pair and kIoError on write failure.
std::size_t export_sft_records(const std::vector<QueryPair>& pairs, const std::filesystem::path& path);

/// Single-turn environment: the agent submits one final answer, either
/// {"program": [{"name", "operands"}, ...]} executed against s_0, or a typed
/// value {"kind", "value"} where graph values are full graph objects.
class CpEnvironment : public Environment {
 public:
  App app() const override { return App::kCp; }
  void reset(const QuerySpec& query, const GroundTruth& truth) override;
  std::string instructions() const override;
  std::string status() const override;
  StepOutcome step(const AgentMessage& message) override;
  bool goal_reached() const override { return correct_; }
  bool correct() const override { return correct_; }
  std::string state_digest() const override { return final_digest_; }

 private:
  CpGraph initial_;
  CpResult golden_;
  std::string target_digest_;
  std::string final_digest_;
  bool answered_ = false;
  bool correct_ = false;
};

}  // namespace netbench::cp
