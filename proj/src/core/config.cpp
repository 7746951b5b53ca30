#include "netbench/core/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "netbench/core/error.hpp"

namespace netbench {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto text = trim(value);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "'" + key + "' is not a non-negative integer: " + value);
  }
  return out;
}

std::vector<int> parse_levels(const std::string& value) {
  std::vector<int> levels;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto level = parse_u64("levels", item);
    levels.push_back(static_cast<int>(level));
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

}  // namespace

void validate(const BenchmarkConfig& config) {
  if (config.num_queries < 1) {
    throw Error(ErrorCode::kInvalidConfig, "num_queries must be at least 1");
  }
  if (config.levels.empty()) {
    throw Error(ErrorCode::kEmptyLevelSet, "levels must name at least one of 1, 2, 3");
  }
  for (int level : config.levels) {
    if (level < 1 || level > 3) {
      throw Error(ErrorCode::kInvalidConfig, "level " + std::to_string(level) + " is not in 1..3");
    }
  }
  if (config.max_turns < 1) {
    throw Error(ErrorCode::kInvalidConfig, "max_turns must be at least 1");
  }
  if (config.parallelism < 1) {
    throw Error(ErrorCode::kInvalidConfig, "parallelism must be at least 1");
  }
}

BenchmarkConfig parse_config(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream stream{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(stream, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }

  BenchmarkConfig config;
  const auto app = tree.get_optional<std::string>("app");
  if (!app) throw Error(ErrorCode::kInvalidConfig, "missing required key 'app'");
  config.app = parse_app(trim(*app));

  for (const auto& [key, node] : tree) {
    if (!node.empty()) continue;  // sections are handled below
    const std::string value = trim(node.data());
    if (key == "app") {
      continue;
    } else if (key == "num_queries") {
      config.num_queries = parse_u64(key, value);
    } else if (key == "levels") {
      config.levels = parse_levels(value);
    } else if (key == "seed") {
      config.seed = parse_u64(key, value);
    } else if (key == "max_turns") {
      config.max_turns = parse_u64(key, value);
    } else if (key == "agent") {
      config.agent = value;
    } else if (key == "parallelism") {
      config.parallelism = parse_u64(key, value);
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown key '" + key + "'");
    }
  }

  if (const auto section = tree.get_child_optional(std::string(to_string(config.app)))) {
    for (const auto& [key, node] : *section) config.app_params[key] = trim(node.data());
  }
  validate(config);
  return config;
}

BenchmarkConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

nlohmann::json to_json(const BenchmarkConfig& config) {
  return nlohmann::json{{"app", to_string(config.app)},
                        {"num_queries", config.num_queries},
                        {"levels", config.levels},
                        {"seed", config.seed},
                        {"max_turns", config.max_turns},
                        {"agent", config.agent},
                        {"parallelism", config.parallelism},
                        {"app_params", config.app_params}};
}

std::int64_t param_int(const std::map<std::string, std::string>& params, const std::string& key,
                       std::int64_t fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::int64_t out = 0;
  const auto& text = it->second;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "'" + key + "' is not an integer: " + text);
  }
  return out;
}

std::string param_string(const std::map<std::string, std::string>& params, const std::string& key,
                         const std::string& fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace netbench
