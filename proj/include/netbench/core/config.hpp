#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "netbench/core/query.hpp"

namespace netbench {

/// User-facing generation and run configuration.
///
/// File format: flat `key = value` lines, `#` or `;` comments, and an optional
/// table section named after the app (`[cp]`, `[routing]`, `[k8s]`) whose keys
/// are passed to that application's generator verbatim:
///
///     app = routing
///     num_queries = 300
///     levels = 1,2,3
///     seed = 0
///     max_turns = 20
///     agent = oracle
///     parallelism = 4
///
///     [routing]
///     min_switches = 2
struct BenchmarkConfig {
  App app = App::kCp;
  std::size_t num_queries = 1;
  std::vector<int> levels{1, 2, 3};
  std::uint64_t seed = 0;
  std::size_t max_turns = 20;
  std::string agent = "oracle";
  std::size_t parallelism = 1;
  std::map<std::string, std::string> app_params;
};

/// Throws kInvalidConfig, kUnknownApp or kEmptyLevelSet.
void validate(const BenchmarkConfig& config);

BenchmarkConfig parse_config(std::string_view text);
BenchmarkConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const BenchmarkConfig& config);

/// Typed lookup into app_params with a default; throws kInvalidConfig when the
/// value does not parse.
std::int64_t param_int(const std::map<std::string, std::string>& params, const std::string& key,
                       std::int64_t fallback);
std::string param_string(const std::map<std::string, std::string>& params, const std::string& key,
                         const std::string& fallback);

}  // namespace netbench
