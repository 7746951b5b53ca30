#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "netbench/core/config.hpp"
#include "netbench/core/episode.hpp"
#include "netbench/core/query.hpp"

namespace netbench {

/// What the generic batch machinery needs from an application.
struct AppDriver {
  App app = App::kCp;
  /// Taxonomy labels for a complexity level.
  std::function<std::vector<std::string>(int level)> labels;
  /// Deterministic in (level, seed). The returned query's id is assigned by
  /// the caller.
  std::function<QueryPair(int level, std::uint64_t seed)> generate;
  std::function<std::unique_ptr<Environment>()> make_environment;
};

/// Query ids are "<app>-<index, 6 digits>" so lexical order is index order.
std::string query_id(App app, std::size_t index);

/// Emits exactly config.num_queries pairs. Query i uses
/// split_seed(config.seed, i) and level levels[i % levels.size()]; the output
/// order is the index order regardless of config.parallelism.
std::vector<QueryPair> generate_batch(const BenchmarkConfig& config, const AppDriver& driver);

/// JSON Lines persistence, one {"query", "truth"} object per line.
void write_pairs(const std::filesystem::path& path, const std::vector<QueryPair>& pairs);
std::vector<QueryPair> read_pairs(const std::filesystem::path& path);

}  // namespace netbench
