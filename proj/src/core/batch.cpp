#include "netbench/core/batch.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "netbench/core/error.hpp"
#include "netbench/core/seed.hpp"

namespace netbench {

std::string query_id(App app, std::size_t index) {
  char digits[32];
  std::snprintf(digits, sizeof(digits), "%06zu", index);
  return std::string(to_string(app)) + "-" + digits;
}

std::vector<QueryPair> generate_batch(const BenchmarkConfig& config, const AppDriver& driver) {
  validate(config);
  if (driver.app != config.app) {
    throw Error(ErrorCode::kAppMismatch, "driver does not serve app " +
                                             std::string(to_string(config.app)));
  }

  std::vector<QueryPair> pairs(config.num_queries);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        const int level = config.levels[i % config.levels.size()];
        QueryPair pair = driver.generate(level, split_seed(config.seed, i));
        pair.query.id = query_id(config.app, i);
        pairs[i] = std::move(pair);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = pairs.size();
      }
    }
  };

  const std::size_t workers = std::min(config.parallelism, pairs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return pairs;
}

void write_pairs(const std::filesystem::path& path, const std::vector<QueryPair>& pairs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto& pair : pairs) out << nlohmann::json(pair).dump() << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<QueryPair> read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<QueryPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      pairs.push_back(nlohmann::json::parse(line).get<QueryPair>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace netbench
