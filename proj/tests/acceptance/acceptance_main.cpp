// Prints one PASS/FAIL line per acceptance criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "netbench/agents/agents.hpp"
#include "netbench/apps.hpp"
#include "netbench/core/seed.hpp"
#include "netbench/cp/topology.hpp"
#include "netbench/eval/metrics.hpp"
#include "netbench/k8s/connectivity.hpp"
#include "netbench/k8s/generator.hpp"
#include "netbench/k8s/kubectl.hpp"
#include "netbench/routing/commands.hpp"
#include "netbench/routing/generator.hpp"
#include "netbench/routing/inject.hpp"
#include "netbench/routing/pingall.hpp"

using namespace netbench;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& check) {
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << "  " << id << ". " << name << " -- " << v.detail << std::endl;
}

std::vector<QueryPair> batch(App app, std::size_t n, std::vector<int> levels = {1, 2, 3}, std::uint64_t seed = 0) {
  BenchmarkConfig config;
  config.app = app;
  config.num_queries = n;
  config.levels = std::move(levels);
  config.seed = seed;
  config.parallelism = 4;
  return generate_batch(config, make_driver(app));
}

std::string serialize(const std::vector<QueryPair>& pairs) {
  const fs::path path = fs::temp_directory_path() / "netbench_acceptance_batch.jsonl";
  write_pairs(path, pairs);
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(path);
  return ss.str();
}

const char* app_name(App app) { return app == App::kCp ? "cp" : app == App::kRouting ? "routing" : "k8s"; }

// Criterion 1.
Verdict oracle_closure() {
  const auto start = Clock::now();
  std::ostringstream detail;
  bool pass = true;
  for (App app : {App::kCp, App::kRouting, App::kK8s}) {
    const auto pairs = batch(app, 300);
    std::map<int, std::size_t> per_level;
    std::size_t correct = 0, safe = 0;
    for (const auto& pair : pairs) {
      ++per_level[pair.query.level];
      auto env = make_environment(app);
      agents::OracleAgent oracle(pair.truth);
      const auto result = run_episode(*env, oracle, pair.query, pair.truth, RunOptions{});
      correct += result.correct;
      safe += result.safe;
    }
    const bool balanced = per_level[1] == 100 && per_level[2] == 100 && per_level[3] == 100;
    pass = pass && balanced && correct == 300 && safe == 300;
    detail << app_name(app) << " correct " << correct << "/300 safe " << safe << "/300; ";
  }
  const double t = seconds_since(start);
  detail << "runtime " << t << " s";
  return {pass && t < 120.0, detail.str()};
}

// Criterion 2.
Verdict determinism() {
  std::ostringstream detail;
  bool pass = true;
  double cp_time = 0.0;
  for (auto [app, n] : std::vector<std::pair<App, std::size_t>>{{App::kCp, 5000}, {App::kRouting, 2250}, {App::kK8s, 2000}}) {
    const auto start = Clock::now();
    BenchmarkConfig config;
    config.app = app;
    config.num_queries = n;
    const std::string a = serialize(generate_batch(config, make_driver(app)));
    const double t = seconds_since(start);
    if (app == App::kCp) cp_time = t;
    config.parallelism = 4;
    const std::string b = serialize(generate_batch(config, make_driver(app)));
    const bool same = a == b && std::count(a.begin(), a.end(), '\n') == static_cast<long>(n);
    pass = pass && same;
    detail << app_name(app) << ":" << n << (same ? " identical" : " DIFFERENT") << " (" << a.size() << " bytes, " << t
           << " s); ";
  }
  return {pass && cp_time < 60.0, detail.str()};
}

// Criterion 3.
Verdict ci_math() {
  const double expected_half = 1.96 * std::sqrt(0.5 * 0.5 / 5000.0);
  const auto big = eval::ci95(2500, 5000);
  const auto small = eval::ci95(75, 150);
  const double ratio = small.half_width() / big.half_width();
  const bool ok = std::fabs(big.half_width() - 0.013859) <= 1e-6 &&
                  std::fabs(big.half_width() - expected_half) <= 1e-12 &&
                  std::fabs(ratio - std::sqrt(5000.0 / 150.0)) <= 1e-9;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "half-width(2500/5000) = %.7f, ratio n=150 vs n=5000 = %.10f (sqrt = %.10f)",
                big.half_width(), ratio, std::sqrt(5000.0 / 150.0));
  return {ok, buf};
}

// Criterion 4.
Verdict fault_effectiveness() {
  std::size_t routing_ok = 0, k8s_ok = 0;
  for (const auto& pair : batch(App::kRouting, 1000, {1, 2, 3}, 4)) {
    const auto state = compose_actions<routing::RoutingSystem>(routing::build_network(pair.query.environment),
                                                               pair.truth.hidden_injection);
    routing_ok += routing::pingall(state).failures() > 0;
  }
  for (const auto& pair : batch(App::kK8s, 1000, {1, 2, 3}, 4)) {
    const auto state = compose_actions<k8s::K8sSystem>(k8s::default_policies(), pair.truth.hidden_injection);
    k8s_ok += k8s::connectivity_check(state).mismatch_count() > 0;
  }
  return {routing_ok == 1000 && k8s_ok == 1000, "routing " + std::to_string(routing_ok) +
                                                     "/1000 with pingall failures, k8s " + std::to_string(k8s_ok) +
                                                     "/1000 with mismatches"};
}

// Criterion 5. Reachable ordered pairs in an S x H network where subnet 1's
// router interface is down: hosts reach same-subnet hosts; hosts on live
// subnets reach the router and each other.
std::size_t derived_received(std::size_t subnets, std::size_t hosts) {
  const std::size_t live_hosts = (subnets - 1) * hosts;
  const std::size_t same_subnet = subnets * hosts * (hosts - 1);
  const std::size_t cross_live = live_hosts * (live_hosts - 1) - (subnets - 1) * hosts * (hosts - 1);
  return same_subnet + cross_live + 2 * live_hosts;
}

Verdict pingall_format() {
  routing::NetState s = routing::build_topology(2, 2, "p5_", 1);
  routing::inject_error(s, routing::Family::kDisableInterface, 1, 3);
  const auto m = routing::pingall(s);
  const std::size_t r = derived_received(2, 2);
  const std::size_t t = 5 * 4;
  const auto pct = static_cast<long>(std::floor(100.0 * static_cast<double>(t - r) / static_cast<double>(t) + 0.5));
  const std::string derived = "*** Results: " + std::to_string(pct) + "% dropped (" + std::to_string(r) + "/" +
                              std::to_string(t) + " received)";

  routing::PingMatrix seven;
  for (int i = 1; i <= 6; ++i) seven.nodes.push_back("h" + std::to_string(i));
  seven.nodes.push_back("r0");
  seven.reachable.assign(7, std::vector<bool>(7, false));
  for (int h : {0, 1, 3, 4, 5}) seven.reachable[h][6] = seven.reachable[6][h] = true;
  const bool ok = m.summary_line() == derived && derived == "*** Results: 60% dropped (8/20 received)" &&
                  seven.summary_line() == "*** Results: 76% dropped (10/42 received)";
  return {ok, "2x2 DI-m1: \"" + m.summary_line() + "\"; 7-node: \"" + seven.summary_line() + "\""};
}

// Criterion 6.
Verdict safety_detection() {
  std::size_t flagged = 0, noop_safe = 0;
  const auto pairs = batch(App::kRouting, 100, {1, 2, 3}, 6);
  for (const auto& pair : pairs) {
    auto env = make_environment(App::kRouting);
    agents::AdversarialAgent adversary(pair.truth);
    flagged += !run_episode(*env, adversary, pair.query, pair.truth, RunOptions{}).safe;
    agents::NoopAgent noop;
    noop_safe += run_episode(*env, noop, pair.query, pair.truth, RunOptions{}).safe;
  }
  return {flagged == 100 && noop_safe == 100,
          "adversarial unsafe " + std::to_string(flagged) + "/100, noop safe " + std::to_string(noop_safe) + "/100"};
}

// Criterion 7. Capacity by explicit stack traversal over the edge list.
std::int64_t traversal_capacity(const cp::CpGraph& g, const std::string& root) {
  std::map<std::string, std::vector<std::string>> down;
  for (const auto& e : g.edges()) {
    if (e.type == cp::kContains) down[e.src].push_back(e.dst);
  }
  std::set<std::string> seen{root};
  std::vector<std::string> stack{root};
  std::int64_t total = 0;
  while (!stack.empty()) {
    const std::string n = stack.back();
    stack.pop_back();
    const auto& node = g.node(n);
    if (node.type == "EK_PORT") {
      if (const auto it = node.attrs.find(std::string(cp::kCapacityAttr)); it != node.attrs.end()) {
        total += std::get<std::int64_t>(it->second);
      }
    }
    for (const auto& c : down[n]) {
      if (seen.insert(c).second) stack.push_back(c);
    }
  }
  return total;
}

cp::CpGraph random_graph(Rng& rng) {
  for (;;) {
    cp::TopologySpec spec;
    spec.super_blocks = static_cast<int>(rng.between(1, 2));
    spec.agg_blocks = static_cast<int>(rng.between(1, 3));
    spec.control_points = static_cast<int>(rng.between(1, 2));
    spec.switches = static_cast<int>(rng.between(1, 4));
    spec.ports = static_cast<int>(rng.between(1, 5));
    spec.spine_blocks = static_cast<int>(rng.between(1, 2));
    spec.spine_switches = static_cast<int>(rng.between(1, 3));
    auto g = cp::generate_synthetic_topology(spec, rng.next());
    if (g.nodes().size() <= 200) return g;
  }
}

Verdict cp_equivalence() {
  Rng rng(7);
  std::size_t nodes_checked = 0, mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const auto g = random_graph(rng);
    for (const auto& [name, node] : g.nodes()) {
      ++nodes_checked;
      mismatches += cp::capacity(g, name) != traversal_capacity(g, name);
    }
  }
  std::size_t flagged = 0, clean_bases = 0;
  for (int i = 0; i < 50; ++i) {
    auto g = random_graph(rng);
    clean_bases += cp::check_safety_cp(g).empty();
    std::vector<std::string> ports, jupiters;
    for (const auto& [name, node] : g.nodes()) {
      if (node.type == "EK_PORT") ports.push_back(name);
      if (node.type == "EK_JUPITER") jupiters.push_back(name);
    }
    std::set<cp::ViolationKind> want;
    switch (i % 3) {
      case 0:
        g.add_edge({rng.pick(ports), rng.pick(jupiters), std::string(cp::kContains)});
        want = {cp::ViolationKind::kHierarchyRule, cp::ViolationKind::kIllegalEdgeType};
        break;
      case 1:
        g.mutable_node(rng.pick(ports)).attrs.erase(std::string(cp::kCapacityAttr));
        want = {cp::ViolationKind::kMissingAttribute};
        break;
      default:
        g.add_node("orphan" + std::to_string(i), cp::Node{"EK_RACK", {}});
        want = {cp::ViolationKind::kIsolatedNode};
    }
    for (const auto& v : cp::check_safety_cp(g)) {
      if (want.contains(v.kind)) {
        ++flagged;
        break;
      }
    }
  }
  return {mismatches == 0 && flagged == 50 && clean_bases == 50,
          "capacity matched on " + std::to_string(nodes_checked - mismatches) + "/" + std::to_string(nodes_checked) +
              " nodes of 100 graphs; violations flagged " + std::to_string(flagged) + "/50"};
}

// Criterion 8.
Verdict k8s_round_trip() {
  auto ps = k8s::default_policies();
  const std::string before = k8s::digest(ps);
  const auto listing = k8s::exec_kubectl(ps, "kubectl get networkpolicy -o yaml");
  const auto applied = k8s::exec_kubectl(ps, "kubectl apply -f - <<EOF\n" + listing.output + "EOF");
  const bool round_trip = ps.size() == 13 && applied.kind == StepKind::kWrite && k8s::digest(ps) == before;

  std::size_t emptied = 0;
  const auto pairs = batch(App::kK8s, 500, {1, 2, 3}, 8);
  for (const auto& pair : pairs) {
    auto state = compose_actions<k8s::K8sSystem>(k8s::default_policies(), pair.truth.hidden_injection);
    for (const auto& step : pair.truth.repair) k8s::exec_kubectl(state, step.operands.at(0));
    emptied += k8s::connectivity_check(state).mismatch_count() == 0 && pair.truth.repair.size() <= 2;
  }
  return {round_trip && emptied == 500, std::string("get->apply ") + (round_trip ? "digest-identical" : "CHANGED") +
                                            " over " + std::to_string(ps.size()) + " policies; inverse empties report on " +
                                            std::to_string(emptied) + "/500"};
}

// Criterion 9.
class Scripted : public Agent {
 public:
  explicit Scripted(std::vector<AgentMessage> script) : script_(std::move(script)) {}
  AgentReply next(const QuerySpec&, const Observation&) override {
    AgentReply r;
    r.message = script_.at(std::min(i_++, script_.size() - 1));
    return r;
  }

 private:
  std::vector<AgentMessage> script_;
  std::size_t i_ = 0;
};

Verdict reward_shaping() {
  for (const auto& pair : batch(App::kRouting, 50, {1}, 9)) {
    if (pair.truth.repair.size() != 1) continue;
    const auto& fix = pair.truth.repair[0];
    auto msg = [](std::string c, std::optional<std::string> m = std::nullopt) {
      AgentMessage a;
      a.command = std::move(c);
      a.machine = std::move(m);
      return a;
    };
    Scripted agent({msg("vtysh"), msg("ip addr"), msg("ip route"), msg("iptables -L"), msg(fix.operands[1], fix.operands[0])});
    auto env = make_environment(App::kRouting);
    const auto result = run_episode(*env, agent, pair.query, pair.truth, RunOptions{});
    const int total = eval::episode_reward(result);
    const bool shape = result.turns.size() == 5 && result.turns[0].kind == StepKind::kInvalid &&
                       result.turns[4].goal_reached;
    return {shape && total == 30, "1 invalid + 3 diagnostics + 1 fix on " + pair.query.id + " (" +
                                      pair.query.action_label + ") = " + std::to_string(total)};
  }
  return {false, "no single-step repair found in the sample"};
}

}  // namespace

int main() {
  report(1, "oracle closure on 300 queries per app", oracle_closure);
  report(2, "byte-identical regeneration at CP:5000, Routing:2250, K8s:2000", determinism);
  report(3, "95% interval arithmetic", ci_math);
  report(4, "every reactive query starts faulty", fault_effectiveness);
  report(5, "pingall summary format", pingall_format);
  report(6, "safety detection for adversarial and noop agents", safety_detection);
  report(7, "capacity oracle and CP safety checker", cp_equivalence);
  report(8, "k8s get/apply round-trip and inverse repair", k8s_round_trip);
  report(9, "reward shaping on a scripted transcript", reward_shaping);
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
  return failures;
}
