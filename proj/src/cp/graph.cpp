#include "netbench/cp/graph.hpp"

#include <array>
#include <utility>

#include "netbench/core/digest.hpp"
#include "netbench/core/error.hpp"

namespace netbench::cp {

namespace {

constexpr std::array<std::pair<NodeType, std::string_view>, 10> kTypeNames{{
    {NodeType::kJupiter, "EK_JUPITER"},
    {NodeType::kSpineBlock, "EK_SPINE_BLOCK"},
    {NodeType::kSuperBlock, "EK_SUPER_BLOCK"},
    {NodeType::kAggBlock, "EK_AGG_BLOCK"},
    {NodeType::kPacketSwitch, "EK_PACKET_SWITCH"},
    {NodeType::kPort, "EK_PORT"},
    {NodeType::kChassis, "EK_CHASSIS"},
    {NodeType::kControlPoint, "EK_CONTROL_POINT"},
    {NodeType::kRack, "EK_RACK"},
    {NodeType::kControlDomain, "EK_CONTROL_DOMAIN"},
}};

constexpr std::array<std::pair<NodeType, NodeType>, 12> kHierarchy{{
    {NodeType::kJupiter, NodeType::kSpineBlock},
    {NodeType::kSpineBlock, NodeType::kAggBlock},
    {NodeType::kAggBlock, NodeType::kPacketSwitch},
    {NodeType::kChassis, NodeType::kControlPoint},
    {NodeType::kControlPoint, NodeType::kPacketSwitch},
    {NodeType::kRack, NodeType::kChassis},
    {NodeType::kPacketSwitch, NodeType::kPort},
    {NodeType::kSpineBlock, NodeType::kPacketSwitch},
    {NodeType::kControlDomain, NodeType::kControlPoint},
    {NodeType::kChassis, NodeType::kPacketSwitch},
    {NodeType::kJupiter, NodeType::kSuperBlock},
    {NodeType::kSuperBlock, NodeType::kAggBlock},
}};

const std::set<Edge> kNoEdges;

std::string attr_text(const AttrValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return "i:" + std::to_string(*i);
  return "s:" + std::get<std::string>(value);
}

}  // namespace

std::string_view to_string(NodeType type) {
  for (const auto& [t, name] : kTypeNames) {
    if (t == type) return name;
  }
  return "EK_UNKNOWN";
}

std::optional<NodeType> parse_node_type(std::string_view name) {
  for (const auto& [t, text] : kTypeNames) {
    if (text == name) return t;
  }
  return std::nullopt;
}

const std::vector<NodeType>& all_node_types() {
  static const std::vector<NodeType> types = [] {
    std::vector<NodeType> out;
    for (const auto& entry : kTypeNames) out.push_back(entry.first);
    return out;
  }();
  return types;
}

bool containment_allowed(NodeType parent, NodeType child) {
  for (const auto& [p, c] : kHierarchy) {
    if (p == parent && c == child) return true;
  }
  return false;
}

bool control_allowed(NodeType src, NodeType dst) {
  return (src == NodeType::kControlPoint && dst == NodeType::kPacketSwitch) ||
         (src == NodeType::kControlDomain && dst == NodeType::kControlPoint);
}

const Node& CpGraph::node(const std::string& name) const {
  const auto it = nodes_.find(name);
  if (it == nodes_.end()) throw Error(ErrorCode::kUnknownNode, "no node named '" + name + "'");
  return it->second;
}

Node& CpGraph::mutable_node(const std::string& name) {
  const auto it = nodes_.find(name);
  if (it == nodes_.end()) throw Error(ErrorCode::kUnknownNode, "no node named '" + name + "'");
  return it->second;
}

void CpGraph::add_node(const std::string& name, Node node) {
  if (name.empty()) throw Error(ErrorCode::kInvalidValue, "node name must be nonempty");
  if (!nodes_.emplace(name, std::move(node)).second) {
    throw Error(ErrorCode::kDuplicateName, "node '" + name + "' already exists");
  }
}

void CpGraph::add_edge(const Edge& edge) {
  if (!has_node(edge.src)) throw Error(ErrorCode::kUnknownNode, "no node named '" + edge.src + "'");
  if (!has_node(edge.dst)) throw Error(ErrorCode::kUnknownNode, "no node named '" + edge.dst + "'");
  if (!edges_.insert(edge).second) return;
  incident_[edge.src].insert(edge);
  incident_[edge.dst].insert(edge);
}

void CpGraph::remove_edge(const Edge& edge) {
  if (edges_.erase(edge) == 0) return;
  for (const auto* end : {&edge.src, &edge.dst}) {
    auto it = incident_.find(*end);
    if (it == incident_.end()) continue;
    it->second.erase(edge);
    if (it->second.empty()) incident_.erase(it);
  }
}

void CpGraph::remove_node(const std::string& name) {
  const auto it = incident_.find(name);
  if (it != incident_.end()) {
    const std::set<Edge> edges = it->second;
    for (const auto& edge : edges) remove_edge(edge);
  }
  nodes_.erase(name);
}

std::size_t CpGraph::degree(const std::string& name) const { return incident(name).size(); }

const std::set<Edge>& CpGraph::incident(const std::string& name) const {
  const auto it = incident_.find(name);
  return it == incident_.end() ? kNoEdges : it->second;
}

std::vector<std::string> CpGraph::children(const std::string& name) const {
  std::set<std::string> out;
  for (const auto& edge : incident(name)) {
    if (edge.src == name && edge.type == kContains) out.insert(edge.dst);
  }
  return {out.begin(), out.end()};
}

std::vector<std::string> CpGraph::parents(const std::string& name) const {
  std::set<std::string> out;
  for (const auto& edge : incident(name)) {
    if (edge.dst == name && edge.type == kContains) out.insert(edge.src);
  }
  return {out.begin(), out.end()};
}

std::set<std::string> CpGraph::descendants(const std::string& name) const {
  std::set<std::string> seen;
  std::vector<std::string> stack{name};
  while (!stack.empty()) {
    const std::string current = std::move(stack.back());
    stack.pop_back();
    for (const auto& child : children(current)) {
      if (child != name && seen.insert(child).second) stack.push_back(child);
    }
  }
  return seen;
}

std::string CpGraph::canonical_text() const {
  std::string out;
  for (const auto& [name, node] : nodes_) {
    out += "N\t" + name + "\t" + node.type;
    for (const auto& [key, value] : node.attrs) out += "\t" + key + "=" + attr_text(value);
    out += "\n";
  }
  for (const auto& edge : edges_) out += "E\t" + edge.src + "\t" + edge.dst + "\t" + edge.type + "\n";
  return out;
}

std::string CpGraph::digest() const { return sha256_hex(canonical_text()); }

std::int64_t capacity(const CpGraph& graph, const std::string& name) {
  auto port_capacity = [&](const std::string& n) -> std::int64_t {
    const Node& node = graph.node(n);
    if (node.type != to_string(NodeType::kPort)) return 0;
    const auto it = node.attrs.find(std::string(kCapacityAttr));
    if (it == node.attrs.end()) return 0;
    const auto* value = std::get_if<std::int64_t>(&it->second);
    return value ? *value : 0;
  };
  std::int64_t total = port_capacity(name);
  for (const auto& n : graph.descendants(name)) total += port_capacity(n);
  return total;
}

nlohmann::json graph_to_json(const CpGraph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [name, node] : graph.nodes()) {
    nlohmann::json attrs = nlohmann::json::object();
    for (const auto& [key, value] : node.attrs) {
      std::visit([&](const auto& v) { attrs[key] = v; }, value);
    }
    nodes.push_back({{"name", name}, {"type", node.type}, {"attrs", attrs}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& edge : graph.edges()) {
    edges.push_back({{"src", edge.src}, {"dst", edge.dst}, {"type", edge.type}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

CpGraph graph_from_json(const nlohmann::json& j) {
  CpGraph graph;
  try {
    for (const auto& n : j.at("nodes")) {
      Node node;
      node.type = n.at("type").get<std::string>();
      if (n.contains("attrs")) {
        for (const auto& [key, value] : n.at("attrs").items()) {
          if (value.is_number_integer()) {
            node.attrs[key] = value.get<std::int64_t>();
          } else if (value.is_string()) {
            node.attrs[key] = value.get<std::string>();
          } else {
            throw Error(ErrorCode::kParseError, "attribute '" + key + "' must be integer or string");
          }
        }
      }
      graph.add_node(n.at("name").get<std::string>(), std::move(node));
    }
    for (const auto& e : j.at("edges")) {
      graph.add_edge(Edge{e.at("src").get<std::string>(), e.at("dst").get<std::string>(),
                          e.at("type").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed graph: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, std::string("malformed graph: ") + e.what());
  }
  return graph;
}

}  // namespace netbench::cp
