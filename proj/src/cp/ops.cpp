#include "netbench/cp/ops.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "netbench/core/error.hpp"

namespace netbench::cp {

namespace {

const std::map<std::string, std::size_t, std::less<>> kArity{
    {"add", 4}, {"remove", 1}, {"count", 2}, {"list", 1}, {"rank", 1}, {"update", 3},
};

std::int64_t parse_int(const std::string& text, std::string_view what) {
  std::int64_t out = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::kInvalidValue,
                std::string(what) + " must be an integer, got '" + text + "'");
  }
  return out;
}

NodeType require_type(const std::string& text) {
  const auto type = parse_node_type(text);
  if (!type) throw Error(ErrorCode::kInvalidValue, "unknown node type '" + text + "'");
  return *type;
}

NodeType type_of(const CpGraph& graph, const std::string& name) {
  return require_type(graph.node(name).type);
}

CpResult graph_result(const CpGraph& graph) {
  CpResult result;
  result.kind = ResultKind::kGraph;
  result.graph_digest = graph.digest();
  return result;
}

void op_add(CpState& state, const std::vector<std::string>& args) {
  const auto& [name, type_text, parent, capacity_text] =
      std::tie(args[0], args[1], args[2], args[3]);
  CpGraph& graph = state.graph;
  if (graph.has_node(name)) throw Error(ErrorCode::kDuplicateName, "node '" + name + "' already exists");
  const NodeType type = require_type(type_text);
  const NodeType parent_type = type_of(graph, parent);
  if (!containment_allowed(parent_type, type)) {
    throw Error(ErrorCode::kHierarchyViolation, std::string(to_string(parent_type)) +
                                                    " cannot contain " + std::string(to_string(type)));
  }
  const std::int64_t bps = parse_int(capacity_text, "capacity_bps");
  const bool needs_capacity = type == NodeType::kPort || type == NodeType::kPacketSwitch;
  if (needs_capacity && bps <= 0) {
    throw Error(ErrorCode::kInvalidValue, "capacity_bps must be positive for " + type_text);
  }

  Node node{type_text, {}};
  if (type == NodeType::kPort) node.attrs[std::string(kCapacityAttr)] = bps;
  if (type == NodeType::kPacketSwitch) node.attrs[std::string(kSwitchLocAttr)] = parent;
  const std::string port = name + ".p1";
  if (type == NodeType::kPacketSwitch && graph.has_node(port)) {
    throw Error(ErrorCode::kDuplicateName, "node '" + port + "' already exists");
  }
  graph.add_node(name, std::move(node));
  graph.add_edge(Edge{parent, name, std::string(kContains)});
  // A switch must hold at least one port, so a new switch comes with one.
  if (type == NodeType::kPacketSwitch) {
    graph.add_node(port, Node{std::string(to_string(NodeType::kPort)),
                              {{std::string(kCapacityAttr), bps}}});
    graph.add_edge(Edge{name, port, std::string(kContains)});
  }
  state.result = graph_result(graph);
}

void op_remove(CpState& state, const std::vector<std::string>& args) {
  CpGraph& graph = state.graph;
  const std::string& target = args[0];
  graph.node(target);

  // Cascade to descendants whose every containing parent is being removed.
  std::set<std::string> doomed{target};
  std::vector<std::string> stack{target};
  while (!stack.empty()) {
    const std::string current = std::move(stack.back());
    stack.pop_back();
    for (const auto& child : graph.children(current)) {
      if (doomed.contains(child)) continue;
      const auto parents = graph.parents(child);
      if (std::all_of(parents.begin(), parents.end(),
                      [&](const std::string& p) { return doomed.contains(p); })) {
        doomed.insert(child);
        stack.push_back(child);
      }
    }
  }

  const std::string switch_type(to_string(NodeType::kPacketSwitch));
  const std::string port_type(to_string(NodeType::kPort));
  std::set<std::string> neighbours;
  for (const auto& name : doomed) {
    for (const auto& edge : graph.incident(name)) {
      for (const auto* end : {&edge.src, &edge.dst}) {
        if (!doomed.contains(*end)) neighbours.insert(*end);
      }
    }
  }
  for (const auto& n : neighbours) {
    const auto& edges = graph.incident(n);
    const bool isolated = std::all_of(edges.begin(), edges.end(), [&](const Edge& e) {
      return doomed.contains(e.src == n ? e.dst : e.src);
    });
    if (isolated) {
      throw Error(ErrorCode::kHierarchyViolation,
                  "removing '" + target + "' would leave '" + n + "' isolated");
    }
    if (graph.node(n).type == switch_type) {
      bool has_port = false;
      for (const auto& child : graph.children(n)) {
        if (!doomed.contains(child) && graph.node(child).type == port_type) has_port = true;
      }
      if (!has_port) {
        throw Error(ErrorCode::kHierarchyViolation,
                    "removing '" + target + "' would leave switch '" + n + "' without ports");
      }
    }
  }
  for (const auto& name : doomed) graph.remove_node(name);
  state.result = graph_result(graph);
}

void op_count(CpState& state, const std::vector<std::string>& args) {
  require_type(args[0]);
  state.result = CpResult{};
  state.result.kind = ResultKind::kScalar;
  state.result.scalar = count_descendants(state.graph, args[0], args[1]);
}

void op_list(CpState& state, const std::vector<std::string>& args) {
  state.graph.node(args[0]);
  state.result = CpResult{};
  state.result.kind = ResultKind::kNameList;
  state.result.names = state.graph.children(args[0]);
}

void op_rank(CpState& state, const std::vector<std::string>& args) {
  state.result = CpResult{};
  state.result.kind = ResultKind::kRankedList;
  state.result.ranked = rank_children(state.graph, args[0]);
}

void op_update(CpState& state, const std::vector<std::string>& args) {
  Node& node = state.graph.mutable_node(args[0]);
  const auto it = node.attrs.find(args[1]);
  if (it == node.attrs.end() || !std::holds_alternative<std::int64_t>(it->second)) {
    throw Error(ErrorCode::kInvalidValue,
                "'" + args[0] + "' has no numeric attribute '" + args[1] + "'");
  }
  const std::int64_t value = parse_int(args[2], args[1]);
  if (args[1] == kCapacityAttr && value <= 0) {
    throw Error(ErrorCode::kInvalidValue, "physical_capacity_bps must be positive");
  }
  it->second = value;
  state.result = graph_result(state.graph);
}

}  // namespace

std::string_view to_string(ResultKind kind) {
  switch (kind) {
    case ResultKind::kScalar: return "scalar";
    case ResultKind::kNameList: return "name-list";
    case ResultKind::kRankedList: return "ranked-list";
    case ResultKind::kGraph: return "graph";
  }
  return "graph";
}

nlohmann::json result_to_json(const CpResult& result) {
  nlohmann::json value;
  switch (result.kind) {
    case ResultKind::kScalar: value = result.scalar; break;
    case ResultKind::kNameList: value = result.names; break;
    case ResultKind::kRankedList:
      value = nlohmann::json::array();
      for (const auto& [name, score] : result.ranked) value.push_back({name, score});
      break;
    case ResultKind::kGraph: value = {{"digest", result.graph_digest}}; break;
  }
  return {{"kind", to_string(result.kind)}, {"value", value}};
}

CpResult result_from_json(const nlohmann::json& j) {
  CpResult result;
  try {
    const auto kind = j.at("kind").get<std::string>();
    const auto& value = j.at("value");
    if (kind == "scalar") {
      result.kind = ResultKind::kScalar;
      result.scalar = value.get<std::int64_t>();
    } else if (kind == "name-list") {
      result.kind = ResultKind::kNameList;
      result.names = value.get<std::vector<std::string>>();
    } else if (kind == "ranked-list") {
      result.kind = ResultKind::kRankedList;
      for (const auto& entry : value) {
        if (entry.is_array()) {
          result.ranked.emplace_back(entry.at(0).get<std::string>(), entry.at(1).get<std::int64_t>());
        } else {
          result.ranked.emplace_back(entry.at("name").get<std::string>(),
                                     entry.at("capacity").get<std::int64_t>());
        }
      }
    } else if (kind == "graph") {
      result.kind = ResultKind::kGraph;
      result.graph_digest = value.contains("digest") ? value.at("digest").get<std::string>()
                                                     : graph_from_json(value).digest();
    } else {
      throw Error(ErrorCode::kParseError, "unknown result kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed result: ") + e.what());
  }
  return result;
}

bool compare_results(const CpResult& candidate, const CpResult& golden) {
  if (candidate.kind != golden.kind) return false;
  switch (golden.kind) {
    case ResultKind::kScalar: return candidate.scalar == golden.scalar;
    case ResultKind::kNameList: return candidate.names == golden.names;
    case ResultKind::kRankedList: return candidate.ranked == golden.ranked;
    case ResultKind::kGraph: return candidate.graph_digest == golden.graph_digest;
  }
  return false;
}

void CpSystem::validate(const ActionSpec& action) {
  const auto it = kArity.find(action.name);
  if (it == kArity.end()) {
    throw Error(ErrorCode::kUnknownAction, "unknown operation '" + action.name + "'");
  }
  if (action.operands.size() != it->second) {
    throw Error(ErrorCode::kArityMismatch, action.name + " takes " + std::to_string(it->second) +
                                               " operands, got " +
                                               std::to_string(action.operands.size()));
  }
}

void CpSystem::apply(CpState& state, const ActionSpec& action) {
  validate(action);
  const auto& args = action.operands;
  if (action.name == "add") {
    op_add(state, args);
  } else if (action.name == "remove") {
    op_remove(state, args);
  } else if (action.name == "count") {
    op_count(state, args);
  } else if (action.name == "list") {
    op_list(state, args);
  } else if (action.name == "rank") {
    op_rank(state, args);
  } else {
    op_update(state, args);
  }
}

std::pair<CpGraph, CpResult> apply_basic_op(const CpGraph& graph, const ActionSpec& op) {
  CpState state{graph, {}};
  CpSystem::apply(state, op);
  return {std::move(state.graph), std::move(state.result)};
}

std::vector<std::pair<std::string, std::int64_t>> rank_children(const CpGraph& graph,
                                                                const std::string& name) {
  graph.node(name);
  std::vector<std::pair<std::string, std::int64_t>> out;
  for (const auto& child : graph.children(name)) out.emplace_back(child, capacity(graph, child));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

std::int64_t count_descendants(const CpGraph& graph, const std::string& type,
                               const std::string& name) {
  graph.node(name);
  std::int64_t count = 0;
  for (const auto& n : graph.descendants(name)) {
    if (graph.node(n).type == type) ++count;
  }
  return count;
}

}  // namespace netbench::cp
