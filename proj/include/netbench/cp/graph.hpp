#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace netbench::cp {

enum class NodeType {
  kJupiter,
  kSpineBlock,
  kSuperBlock,
  kAggBlock,
  kPacketSwitch,
  kPort,
  kChassis,
  kControlPoint,
  kRack,
  kControlDomain,
};

inline constexpr std::string_view kContains = "RK_CONTAINS";
inline constexpr std::string_view kControl = "RK_CONTROL";
inline constexpr std::string_view kCapacityAttr = "physical_capacity_bps";
inline constexpr std::string_view kSwitchLocAttr = "switch_loc";

std::string_view to_string(NodeType type);
std::optional<NodeType> parse_node_type(std::string_view name);
const std::vector<NodeType>& all_node_types();

/// The containment hierarchy: true iff `parent` may RK_CONTAINS `child`.
bool containment_allowed(NodeType parent, NodeType child);
/// RK_CONTROL edges run from a control point to a switch, or from a control
/// domain to a control point.
bool control_allowed(NodeType src, NodeType dst);

using AttrValue = std::variant<std::int64_t, std::string>;

struct Node {
  /// Kept as text so graphs read from files or agent answers can hold
  /// unknown kinds for the safety checker to report.
  std::string type;
  std::map<std::string, AttrValue> attrs;
  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::string src;
  std::string dst;
  std::string type;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Attributed directed multigraph keyed by node name. Edges must reference
/// existing nodes; everything else (types, hierarchy, attributes) is checked
/// by check_safety_cp rather than enforced here.
class CpGraph {
 public:
  bool has_node(const std::string& name) const { return nodes_.contains(name); }
  /// Throws kUnknownNode.
  const Node& node(const std::string& name) const;
  Node& mutable_node(const std::string& name);
  /// Throws kDuplicateName.
  void add_node(const std::string& name, Node node);
  /// Throws kUnknownNode if an endpoint is missing. Duplicate edges collapse.
  void add_edge(const Edge& edge);
  void remove_edge(const Edge& edge);
  /// Removes the node and every incident edge.
  void remove_node(const std::string& name);

  const std::map<std::string, Node>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::size_t degree(const std::string& name) const;
  const std::set<Edge>& incident(const std::string& name) const;

  /// Direct RK_CONTAINS children / parents, sorted by name.
  std::vector<std::string> children(const std::string& name) const;
  std::vector<std::string> parents(const std::string& name) const;
  /// Every node reachable through RK_CONTAINS edges, excluding `name`.
  std::set<std::string> descendants(const std::string& name) const;

  /// Order-independent serialization; the digest is its SHA-256.
  std::string canonical_text() const;
  std::string digest() const;

  friend bool operator==(const CpGraph& a, const CpGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::map<std::string, Node> nodes_;
  std::set<Edge> edges_;
  std::map<std::string, std::set<Edge>> incident_;
};

/// capacity(n): sum of physical_capacity_bps over the EK_PORT nodes in n's
/// containment closure, n included. Shared descendants count once.
std::int64_t capacity(const CpGraph& graph, const std::string& name);

/// {"nodes": [{"name", "type", "attrs"}], "edges": [{"src", "dst", "type"}]}
nlohmann::json graph_to_json(const CpGraph& graph);
/// Throws kParseError.
CpGraph graph_from_json(const nlohmann::json& j);

}  // namespace netbench::cp
