#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "netbench/agents/agents.hpp"
#include "netbench/apps.hpp"
#include "netbench/core/batch.hpp"
#include "netbench/core/config.hpp"
#include "netbench/core/error.hpp"
#include "netbench/cp/generator.hpp"
#include "netbench/cp/topology.hpp"
#include "netbench/eval/metrics.hpp"
#include "netbench/k8s/policy.hpp"
#include "netbench/routing/commands.hpp"
#include "netbench/routing/pingall.hpp"

namespace fs = std::filesystem;
using namespace netbench;

namespace {

enum Exit { kOk = 0, kConfig = 1, kGeneration = 2, kTransport = 3, kInternal = 4 };

struct Failure {
  Exit code;
  std::string message;
};

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

BenchmarkConfig load_or_fail(const std::string& path) {
  try {
    return load_config(path);
  } catch (const Error& e) {
    throw Failure{kConfig, e.what()};
  }
}

AppDriver driver_or_fail(const BenchmarkConfig& config) {
  try {
    return make_driver(config.app, config.app_params);
  } catch (const Error& e) {
    throw Failure{kConfig, e.what()};
  }
}

// ---- generate ----

struct GenerateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> num_queries;
  std::optional<std::size_t> parallelism;
};

int cmd_generate(const GenerateArgs& a) {
  BenchmarkConfig config = load_or_fail(a.config);
  if (a.seed) config.seed = *a.seed;
  if (a.num_queries) config.num_queries = *a.num_queries;
  if (a.parallelism) config.parallelism = *a.parallelism;
  const AppDriver driver = driver_or_fail(config);
  const std::string started = now_iso();
  std::vector<QueryPair> pairs;
  try {
    pairs = generate_batch(config, driver);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidConfig || e.code() == ErrorCode::kEmptyLevelSet) throw Failure{kConfig, e.what()};
    throw Failure{kGeneration, e.what()};
  }
  write_pairs(a.out, pairs);
  nlohmann::json statuses = nlohmann::json::object();
  for (const auto& p : pairs) statuses[p.query.id] = "generated";
  write_json(a.out + ".manifest.json", {{"tool_version", NETBENCH_VERSION},
                                        {"command", "generate"},
                                        {"config", to_json(config)},
                                        {"started", started},
                                        {"finished", now_iso()},
                                        {"queries", statuses}});
  std::cout << "wrote " << pairs.size() << " " << to_string(config.app) << " queries to " << a.out << "\n";
  return kOk;
}

// ---- run ----

struct RunArgs {
  std::string queries;
  std::string out;
  std::string config;
  std::string agent;
  std::optional<std::size_t> parallelism;
  std::optional<std::size_t> max_turns;
  std::optional<std::uint64_t> seed;
  std::size_t timeout_ms = 120000;
  std::string prompt_style = "plain";
  std::string group_by = "none";
};

// Lines that fail to parse (a write cut short by an interruption) are skipped.
template <typename T>
std::map<std::string, nlohmann::json> load_by_id(const fs::path& path, const char* id_key) {
  std::map<std::string, nlohmann::json> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains(id_key)) continue;
    try {
      (void)j.get<T>();
    } catch (const std::exception&) {
      continue;
    }
    if (!j[id_key].is_string()) continue;
    const std::string id = j[id_key].get<std::string>();
    out[id] = std::move(j);
  }
  return out;
}

int cmd_run(const RunArgs& a) {
  BenchmarkConfig config;
  std::string agent_spec = a.agent;
  if (!a.config.empty()) {
    config = load_or_fail(a.config);
    if (agent_spec.empty()) agent_spec = config.agent;
  }
  if (a.parallelism) config.parallelism = *a.parallelism;
  if (a.max_turns) config.max_turns = *a.max_turns;
  if (a.seed) config.seed = *a.seed;
  agent_spec = agents::resolve_agent_spec(agent_spec);
  agents::PromptStyle style;
  try {
    style = agents::parse_prompt_style(a.prompt_style);
    (void)eval::parse_group_by(a.group_by);
  } catch (const Error& e) {
    throw Failure{kConfig, e.what()};
  }
  if (config.parallelism == 0 || config.max_turns == 0) throw Failure{kConfig, "parallelism and max_turns must be positive"};

  std::vector<QueryPair> pairs;
  try {
    pairs = read_pairs(a.queries);
    for (const auto& p : pairs) validate(p.truth);
  } catch (const Error& e) {
    throw Failure{kConfig, e.what()};
  }
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    if (!ids.insert(p.query.id).second) throw Failure{kConfig, "duplicate query id " + p.query.id};
  }

  const fs::path dir = a.out;
  fs::create_directories(dir);
  const fs::path records_path = dir / "records.jsonl";
  const fs::path transcripts_path = dir / "transcripts.jsonl";
  auto records = load_by_id<eval::MetricRecord>(records_path, "query_id");
  auto transcripts = load_by_id<EpisodeResult>(transcripts_path, "query_id");

  std::vector<const QueryPair*> pending;
  for (const auto& p : pairs) {
    if (records.contains(p.query.id) && transcripts.contains(p.query.id)) continue;
    records.erase(p.query.id);
    transcripts.erase(p.query.id);
    pending.push_back(&p);
  }
  // Rewrite the completed set so a partial tail line never survives.
  auto rewrite = [&] {
    std::ofstream r(records_path, std::ios::binary | std::ios::trunc);
    for (const auto& [id, j] : records) r << j.dump() << '\n';
    std::ofstream t(transcripts_path, std::ios::binary | std::ios::trunc);
    for (const auto& [id, j] : transcripts) t << j.dump() << '\n';
  };
  rewrite();

  const std::string started = now_iso();
  std::mutex mutex;
  std::ofstream records_out(records_path, std::ios::binary | std::ios::app);
  std::ofstream transcripts_out(transcripts_path, std::ios::binary | std::ios::app);
  std::map<std::string, std::string> failed;
  std::optional<Failure> stop;
  std::atomic<std::size_t> next{0};
  RunOptions options;
  options.max_turns = config.max_turns;

  auto worker = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      {
        std::lock_guard lock(mutex);
        if (stop) return;
      }
      const QueryPair& pair = *pending[i];
      try {
        auto agent = agents::make_agent(agent_spec, pair, config.seed, std::chrono::milliseconds(a.timeout_ms), style);
        auto env = make_environment(pair.query.app);
        const EpisodeResult result = run_episode(*env, *agent, pair.query, pair.truth, options);
        if (auto* ext = dynamic_cast<agents::ExternalAgent*>(agent.get()); ext && ext->fatal()) {
          std::lock_guard lock(mutex);
          failed[pair.query.id] = *ext->fatal();
          if (!stop) stop = Failure{kTransport, "agent transport failed on " + pair.query.id + ": " + *ext->fatal()};
          continue;
        }
        const eval::MetricRecord record = eval::score_episode(result, pair.truth);
        std::lock_guard lock(mutex);
        records[pair.query.id] = record;
        transcripts[pair.query.id] = result;
        records_out << nlohmann::json(record).dump() << '\n' << std::flush;
        transcripts_out << nlohmann::json(result).dump() << '\n' << std::flush;
      } catch (const Error& e) {
        std::lock_guard lock(mutex);
        failed[pair.query.id] = e.what();
        const bool transport = e.code() == ErrorCode::kTransportError || e.code() == ErrorCode::kTimeout;
        const bool setup = e.code() == ErrorCode::kInvalidConfig || e.code() == ErrorCode::kMissingInverse ||
                           e.code() == ErrorCode::kAppMismatch;
        if (!stop) stop = Failure{transport ? kTransport : setup ? kConfig : kInternal, e.what()};
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        failed[pair.query.id] = e.what();
        if (!stop) stop = Failure{kInternal, e.what()};
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(config.parallelism, pending.size()));
  {
    std::vector<std::jthread> threads;
    for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(worker);
    worker();
  }
  records_out.close();
  transcripts_out.close();
  rewrite();

  std::vector<eval::MetricRecord> ordered;
  nlohmann::json statuses = nlohmann::json::object();
  for (const auto& p : pairs) {
    const auto& id = p.query.id;
    if (records.contains(id)) {
      ordered.push_back(records[id].get<eval::MetricRecord>());
      statuses[id] = "done";
    } else {
      statuses[id] = failed.contains(id) ? "failed" : "pending";
    }
  }
  if (!ordered.empty()) eval::emit_reports(ordered, dir, eval::parse_group_by(a.group_by));
  nlohmann::json snapshot = to_json(config);
  snapshot["agent"] = agent_spec;
  write_json(dir / "manifest.json", {{"tool_version", NETBENCH_VERSION},
                                     {"command", "run"},
                                     {"queries_file", a.queries},
                                     {"config", snapshot},
                                     {"started", started},
                                     {"finished", now_iso()},
                                     {"queries", statuses}});
  if (stop) throw *stop;
  std::size_t correct = 0, safe = 0;
  for (const auto& r : ordered) {
    correct += r.correct;
    safe += r.safe;
  }
  std::cout << "ran " << pending.size() << " episodes (" << ordered.size() << " total) with agent " << agent_spec
            << ": correct " << correct << "/" << ordered.size() << ", safe " << safe << "/" << ordered.size() << "\n";
  return kOk;
}

// ---- report ----

int cmd_report(const std::string& path, const std::string& group_by, const std::string& out) {
  std::vector<eval::MetricRecord> records;
  eval::GroupBy group;
  try {
    group = eval::parse_group_by(group_by);
    records = eval::read_records(path);
  } catch (const Error& e) {
    throw Failure{kConfig, e.what()};
  }
  if (records.empty()) throw Failure{kConfig, path + " holds no records"};
  const std::string csv = eval::to_csv(eval::aggregate(records, group));
  std::cout << csv;
  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!(f << csv)) throw Failure{kConfig, "cannot write " + out};
  }
  return kOk;
}

// ---- topology ----

int cmd_topology(const std::string& app_name, const std::string& config_path, int switches, int hosts,
                 const std::string& prefix) {
  App app;
  try {
    app = parse_app(app_name);
  } catch (const Error& e) {
    throw Failure{kConfig, e.what()};
  }
  if (app == App::kCp) {
    std::map<std::string, std::string> params;
    if (!config_path.empty()) params = load_or_fail(config_path).app_params;
    const AppDriver driver = driver_or_fail(BenchmarkConfig{.app = App::kCp, .app_params = params});
    const QueryPair sample = driver.generate(1, 0);
    std::cout << cp::format_topology(cp::build_graph(sample.query.environment));
  } else if (app == App::kRouting) {
    routing::NetState state;
    try {
      state = routing::build_topology(switches, hosts, prefix, 0);
    } catch (const Error& e) {
      throw Failure{kConfig, e.what()};
    }
    std::cout << routing::exec_command(state, state.router_name(), "ip addr").output << "\n"
              << routing::pingall(state).render() << "\n";
  } else {
    std::cout << k8s::emit_yaml(k8s::default_policies());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netbench: generate network-management benchmark queries, run agents, report metrics"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate query/ground-truth pairs as JSON Lines");
  generate->add_option("--config", gen.config, "Config file")->required();
  generate->add_option("--out", gen.out, "Output JSONL path")->required();
  generate->add_option("--seed", gen.seed, "Override the master seed");
  generate->add_option("--num-queries", gen.num_queries, "Override num_queries");
  generate->add_option("--parallelism", gen.parallelism, "Worker threads");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an agent over generated queries");
  run_cmd->add_option("--queries", run.queries, "Queries JSONL")->required();
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--config", run.config, "Config file (agent, max_turns, parallelism, seed)");
  run_cmd->add_option("--agent", run.agent,
                      "oracle | noop | random | adversarial | exec:<command> | http://host:port/path "
                      "(default: $NETBENCH_AGENT, then oracle)");
  run_cmd->add_option("--parallelism", run.parallelism, "Concurrent episodes");
  run_cmd->add_option("--max-turns", run.max_turns, "Turn budget per episode");
  run_cmd->add_option("--seed", run.seed, "Seed for the random agent");
  run_cmd->add_option("--timeout-ms", run.timeout_ms, "Per-turn timeout for external agents");
  run_cmd->add_option("--prompt-style", run.prompt_style, "plain | cot | few-shot | react");
  run_cmd->add_option("--group-by", run.group_by, "Grouping for report.csv: none | level | action_label");

  std::string records_path, group_by = "none", report_out;
  auto* report = app.add_subcommand("report", "Aggregate metric records into CSV");
  report->add_option("--records", records_path, "records.jsonl")->required();
  report->add_option("--group-by", group_by, "none | level | action_label");
  report->add_option("--out", report_out, "Also write the CSV here");

  std::string topo_app = "cp", topo_config, topo_prefix = "p1_";
  int topo_switches = 2, topo_hosts = 2;
  auto* topology = app.add_subcommand("topology", "Print an application's initial state");
  topology->add_option("--app", topo_app, "cp | routing | k8s");
  topology->add_option("--config", topo_config, "Config file with a [cp] section");
  topology->add_option("--switches", topo_switches, "Routing subnets (2..4)");
  topology->add_option("--hosts", topo_hosts, "Routing hosts per subnet (2..4)");
  topology->add_option("--prefix", topo_prefix, "Routing name prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*run_cmd) return cmd_run(run);
    if (*report) return cmd_report(records_path, group_by, report_out);
    if (*topology) return cmd_topology(topo_app, topo_config, topo_switches, topo_hosts, topo_prefix);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kIoError ? kConfig : kInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
