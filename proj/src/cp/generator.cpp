#include "netbench/cp/generator.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>

#include "netbench/core/error.hpp"
#include "netbench/core/seed.hpp"

#ifndef NETBENCH_DATA_DIR
#define NETBENCH_DATA_DIR "data"
#endif

namespace netbench::cp {

namespace {

constexpr int kMaxAttempts = 16;
constexpr std::array<std::int64_t, 5> kNewSpeeds{10'000'000'000, 40'000'000'000, 100'000'000'000,
                                                 200'000'000'000, 400'000'000'000};

struct Sample {
  std::vector<ActionSpec> program;
  std::string prompt;
};

std::vector<std::string> nodes_of(const CpGraph& g, NodeType type) {
  std::vector<std::string> out;
  const std::string name(to_string(type));
  for (const auto& [n, node] : g.nodes()) {
    if (node.type == name) out.push_back(n);
  }
  return out;
}

std::size_t port_count(const CpGraph& g, const std::string& sw) {
  std::size_t count = 0;
  for (const auto& child : g.children(sw)) {
    if (g.node(child).type == to_string(NodeType::kPort)) ++count;
  }
  return count;
}

// The parent whose name is the longest dotted prefix of `name`; the first
// parent otherwise.
std::string primary_parent(const CpGraph& g, const std::string& name) {
  const auto parents = g.parents(name);
  if (parents.empty()) throw Error(ErrorCode::kNoEligibleOperand, "'" + name + "' has no parent");
  std::string best = parents.front();
  std::size_t best_len = 0;
  for (const auto& p : parents) {
    if (name.size() > p.size() && name.compare(0, p.size(), p) == 0 && name[p.size()] == '.' &&
        p.size() > best_len) {
      best = p;
      best_len = p.size();
    }
  }
  return best;
}

std::string count_clause(const std::string& type, const std::string& node) {
  return "count the nodes of type " + type + " contained under " + node +
         ", and return the count as a scalar";
}
std::string list_clause(const std::string& node) {
  return "list the names of the direct children of " + node + ", sorted by name";
}
std::string rank_clause(const std::string& node) {
  return "rank the direct children of " + node +
         " by total physical_capacity_bps (highest first, ties by name), and return "
         "(name, capacity) pairs";
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

struct RemovePlan {
  std::string target;
  std::string parent;
};

RemovePlan sample_remove(const CpGraph& g, Rng& rng) {
  std::vector<std::string> eligible = nodes_of(g, NodeType::kPacketSwitch);
  for (const auto& port : nodes_of(g, NodeType::kPort)) {
    const auto parents = g.parents(port);
    if (parents.size() == 1 && port_count(g, parents.front()) >= 2) eligible.push_back(port);
  }
  if (eligible.empty()) throw Error(ErrorCode::kNoEligibleOperand, "no removable switch or port");
  std::sort(eligible.begin(), eligible.end());
  const std::string target = rng.pick(eligible);
  return {target, primary_parent(g, target)};
}

struct AddPlan {
  ActionSpec action;
  std::string name;
  std::string type;
  std::string parent;
  std::int64_t bps = 0;
};

AddPlan sample_add(const CpGraph& g, Rng& rng) {
  static const std::array<NodeType, 2> kTypes{NodeType::kPort, NodeType::kPacketSwitch};
  const NodeType type = rng.pick(kTypes);
  std::vector<std::string> parents;
  for (const auto& [name, node] : g.nodes()) {
    const auto t = parse_node_type(node.type);
    if (t && containment_allowed(*t, type)) parents.push_back(name);
  }
  if (parents.empty()) throw Error(ErrorCode::kNoEligibleOperand, "no legal parent for a new node");

  AddPlan plan;
  plan.type = std::string(to_string(type));
  plan.parent = rng.pick(parents);
  plan.bps = rng.pick(kNewSpeeds);
  plan.name = "new_" + plan.type + "_" + std::to_string(rng.between(1, 99));
  plan.action = {"add", {plan.name, plan.type, plan.parent, std::to_string(plan.bps)}};
  return plan;
}

std::string add_sentence(const AddPlan& plan) {
  if (plan.type == to_string(NodeType::kPort)) {
    return "Add a new port " + plan.name + " (type " + plan.type + ") to " + plan.parent +
           " with physical_capacity_bps=" + std::to_string(plan.bps) + ".";
  }
  return "Add a new packet switch " + plan.name + " (type " + plan.type + ") to " + plan.parent +
         "; it comes with one port carrying physical_capacity_bps=" + std::to_string(plan.bps) + ".";
}

Sample sample_label(const CpGraph& g, const std::string& label, Rng& rng) {
  Sample s;
  const auto dash = label.find('-');
  const std::string head = label.substr(0, dash);
  const std::string tail = dash == std::string::npos ? "" : label.substr(dash + 1);

  if (head == "list" || head == "rank") {
    std::vector<std::string> eligible;
    for (const auto& [name, node] : g.nodes()) {
      if (g.children(name).size() >= (head == "rank" ? 2u : 1u)) eligible.push_back(name);
    }
    if (eligible.empty()) throw Error(ErrorCode::kNoEligibleOperand, "no node with children");
    const std::string node = rng.pick(eligible);
    s.program.push_back({head, {node}});
    s.prompt = capitalize(head == "list" ? list_clause(node) : rank_clause(node)) + ".";
    return s;
  }

  std::string parent;
  std::string count_type;
  if (head == "remove") {
    const RemovePlan plan = sample_remove(g, rng);
    parent = plan.parent;
    s.program.push_back({"remove", {plan.target}});
    s.prompt = "Remove " + plan.target + " from the graph.";
    if (tail == "count") {
      std::set<std::string> types;
      for (const auto& d : g.descendants(parent)) {
        if (d != plan.target) types.insert(g.node(d).type);
      }
      types.insert(std::string(to_string(NodeType::kPort)));
      count_type = rng.pick(std::vector<std::string>(types.begin(), types.end()));
    }
  } else {
    const AddPlan plan = sample_add(g, rng);
    if (g.has_node(plan.name)) throw Error(ErrorCode::kDuplicateName, plan.name);
    parent = plan.parent;
    count_type = plan.type;
    s.program.push_back(plan.action);
    s.prompt = add_sentence(plan);
  }

  if (tail.empty()) {
    s.prompt += " Return the updated graph.";
  } else if (tail == "count") {
    s.program.push_back({"count", {count_type, parent}});
    s.prompt += " Then, in the updated graph, " + count_clause(count_type, parent) + ".";
  } else if (tail == "list") {
    s.program.push_back({"list", {parent}});
    s.prompt += " Then, in the updated graph, " + list_clause(parent) + ".";
  } else {
    s.program.push_back({"rank", {parent}});
    s.prompt += " Then, in the updated graph, " + rank_clause(parent) + ".";
  }
  return s;
}

}  // namespace

const std::vector<std::string>& cp_labels(int level) {
  static const std::map<int, std::vector<std::string>> kLabels{
      {1, {"remove", "rank", "list", "add"}},
      {2, {"remove-count", "remove-list", "remove-rank"}},
      {3, {"add-count", "add-list", "add-rank"}},
  };
  const auto it = kLabels.find(level);
  if (it == kLabels.end()) throw Error(ErrorCode::kInvalidValue, "level must be 1, 2 or 3");
  return it->second;
}

nlohmann::json synthetic_environment(const TopologySpec& spec, std::uint64_t topology_seed) {
  return {{"source", "synthetic"},
          {"spec",
           {{"jupiters", spec.jupiters},
            {"super_blocks", spec.super_blocks},
            {"agg_blocks", spec.agg_blocks},
            {"control_points", spec.control_points},
            {"switches", spec.switches},
            {"ports", spec.ports},
            {"spine_blocks", spec.spine_blocks},
            {"spine_switches", spec.spine_switches}}},
          {"topology_seed", topology_seed}};
}

nlohmann::json fixture_environment(const std::filesystem::path& path) {
  return {{"source", "fixture"}, {"path", path.string()}};
}

CpGraph build_graph(const nlohmann::json& environment) {
  try {
    const auto source = environment.at("source").get<std::string>();
    if (source == "synthetic") {
      const auto& j = environment.at("spec");
      TopologySpec spec;
      spec.jupiters = j.at("jupiters").get<int>();
      spec.super_blocks = j.at("super_blocks").get<int>();
      spec.agg_blocks = j.at("agg_blocks").get<int>();
      spec.control_points = j.at("control_points").get<int>();
      spec.switches = j.at("switches").get<int>();
      spec.ports = j.at("ports").get<int>();
      spec.spine_blocks = j.at("spine_blocks").get<int>();
      spec.spine_switches = j.at("spine_switches").get<int>();
      return generate_synthetic_topology(spec, environment.at("topology_seed").get<std::uint64_t>());
    }
    if (source == "fixture") {
      std::filesystem::path path = environment.at("path").get<std::string>();
      if (path.is_relative() && !std::filesystem::exists(path)) {
        const auto bundled = std::filesystem::path(NETBENCH_DATA_DIR) / path;
        if (std::filesystem::exists(bundled)) path = bundled;
      }
      return load_topology(path);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("bad cp environment: ") + e.what());
  }
  throw Error(ErrorCode::kInvalidConfig, "cp environment source must be synthetic or fixture");
}

QueryPair generate_cp_query(const CpGraph& graph, int level, std::uint64_t seed) {
  const auto& labels = cp_labels(level);
  Rng rng(seed);
  const std::string label = rng.pick(labels);

  std::string last_error;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    try {
      Sample sample = sample_label(graph, label, rng);
      const CpState final = compose_actions<CpSystem>(CpState{graph, {}}, sample.program);
      if (!check_safety_cp(final.graph).empty()) {
        last_error = "program leaves the graph unsafe";
        continue;
      }
      QueryPair pair;
      pair.query.app = App::kCp;
      pair.query.level = level;
      pair.query.action_label = label;
      pair.query.prompt_text = std::move(sample.prompt);
      pair.query.seed = seed;
      pair.truth.kind = TruthKind::kActionProgram;
      pair.truth.program = std::move(sample.program);
      pair.truth.target_digest = final.graph.digest();
      return pair;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNoEligibleOperand) throw;
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::kNoEligibleOperand,
              "could not sample a valid '" + label + "' query: " + last_error);
}

std::size_t export_sft_records(const std::vector<QueryPair>& pairs,
                               const std::filesystem::path& path) {
  for (const auto& pair : pairs) {
    if (pair.truth.kind != TruthKind::kActionProgram) {
      throw Error(ErrorCode::kAppMismatch, "SFT export takes constructive pairs only");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto& pair : pairs) {
    out << nlohmann::json{{"prompt", pair.query.prompt_text}, {"program", pair.truth.program}}.dump()
        << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
  return pairs.size();
}

void CpEnvironment::reset(const QuerySpec& query, const GroundTruth& truth) {
  if (truth.kind != TruthKind::kActionProgram) {
    throw Error(ErrorCode::kAppMismatch, "cp queries carry action programs");
  }
  initial_ = build_graph(query.environment);
  const CpState golden = compose_actions<CpSystem>(CpState{initial_, {}}, truth.program);
  golden_ = golden.result;
  target_digest_ = truth.target_digest;
  final_digest_ = initial_.digest();
  answered_ = false;
  correct_ = false;
}

std::string CpEnvironment::instructions() const {
  return "The topology graph has " + std::to_string(initial_.nodes().size()) + " nodes and " +
         std::to_string(initial_.edges().size()) + " edges.";
}

std::string CpEnvironment::status() const {
  return answered_ ? "Answer received." : "Awaiting a final answer.";
}

StepOutcome CpEnvironment::step(const AgentMessage& message) {
  if (message.kind != MessageKind::kFinalAnswer) {
    return {StepKind::kInvalid,
            "This task takes one final answer: {\"final_answer\": {\"program\": [...]}}", true,
            false};
  }
  answered_ = true;
  const nlohmann::json& answer = message.answer;
  CpGraph final_graph = initial_;
  CpResult result;
  std::string error;

  try {
    if (answer.is_object() && answer.contains("program")) {
      const auto program = answer.at("program").get<std::vector<ActionSpec>>();
      CpState state = compose_actions<CpSystem>(CpState{initial_, {}}, program);
      if (program.empty()) state.result.graph_digest = state.graph.digest();
      final_graph = std::move(state.graph);
      result = std::move(state.result);
    } else if (answer.is_object() && answer.contains("kind")) {
      if (answer.value("kind", "") == "graph") {
        final_graph = graph_from_json(answer.at("value"));
        result.kind = ResultKind::kGraph;
        result.graph_digest = final_graph.digest();
      } else {
        result = result_from_json(answer);
      }
    } else {
      error = "answer must be an object with 'program' or 'kind' and 'value'";
    }
  } catch (const CompositionError& e) {
    error = "operation " + std::to_string(e.index()) + " failed: " + e.what();
  } catch (const Error& e) {
    error = e.what();
  } catch (const nlohmann::json::exception& e) {
    error = std::string("malformed answer: ") + e.what();
  }

  if (!error.empty()) {
    final_digest_ = initial_.digest();
    correct_ = false;
    return {StepKind::kFinalAnswer, "error: " + error, true, false};
  }

  final_digest_ = final_graph.digest();
  const auto violations = check_safety_cp(final_graph);
  correct_ = compare_results(result, golden_) && final_digest_ == target_digest_;
  std::string output = "result: " + result_to_json(result).dump();
  for (const auto& v : violations) {
    output += "\nviolation: " + std::string(to_string(v.kind)) + " " + v.subject;
  }
  return {StepKind::kFinalAnswer, output, violations.empty(), correct_};
}

}  // namespace netbench::cp
