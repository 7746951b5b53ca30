#include "netbench/cp/topology.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "netbench/core/error.hpp"
#include "netbench/core/seed.hpp"
#include "netbench/core/text.hpp"

namespace netbench::cp {

namespace {

constexpr std::array<std::int64_t, 5> kPortSpeeds{10'000'000'000, 40'000'000'000,
                                                  100'000'000'000, 200'000'000'000,
                                                  400'000'000'000};

bool is_integer(std::string_view s) {
  if (!s.empty() && s.front() == '-') s.remove_prefix(1);
  if (s.empty() || s.size() > 18) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::string type_name(NodeType type) { return std::string(to_string(type)); }

}  // namespace

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kIllegalNodeType: return "IllegalNodeType";
    case ViolationKind::kIllegalEdgeType: return "IllegalEdgeType";
    case ViolationKind::kHierarchyRule: return "HierarchyRule";
    case ViolationKind::kMissingAttribute: return "MissingAttribute";
    case ViolationKind::kInvalidAttribute: return "InvalidAttribute";
    case ViolationKind::kIsolatedNode: return "IsolatedNode";
    case ViolationKind::kSwitchWithoutPort: return "SwitchWithoutPort";
  }
  return "Unknown";
}

std::vector<Violation> check_safety_cp(const CpGraph& graph) {
  std::vector<Violation> out;
  const std::string port_type = type_name(NodeType::kPort);
  const std::string switch_type = type_name(NodeType::kPacketSwitch);

  for (const auto& [name, node] : graph.nodes()) {
    if (!parse_node_type(node.type)) {
      out.push_back({ViolationKind::kIllegalNodeType, name, "unknown type " + node.type});
    }
    if (node.type == port_type) {
      const auto it = node.attrs.find(std::string(kCapacityAttr));
      if (it == node.attrs.end()) {
        out.push_back({ViolationKind::kMissingAttribute, name, "no physical_capacity_bps"});
      } else {
        const auto* bps = std::get_if<std::int64_t>(&it->second);
        if (!bps || *bps <= 0) {
          out.push_back({ViolationKind::kInvalidAttribute, name,
                         "physical_capacity_bps must be a positive integer"});
        }
      }
    }
    if (graph.degree(name) == 0) {
      out.push_back({ViolationKind::kIsolatedNode, name, "no incident edges"});
    }
    if (node.type == switch_type) {
      bool has_port = false;
      for (const auto& child : graph.children(name)) {
        if (graph.node(child).type == port_type) has_port = true;
      }
      if (!has_port) out.push_back({ViolationKind::kSwitchWithoutPort, name, "switch holds no port"});
    }
  }

  for (const auto& edge : graph.edges()) {
    const std::string subject = edge.src + " -> " + edge.dst;
    if (edge.type != kContains && edge.type != kControl) {
      out.push_back({ViolationKind::kIllegalEdgeType, subject, "unknown edge type " + edge.type});
      continue;
    }
    const auto src = parse_node_type(graph.node(edge.src).type);
    const auto dst = parse_node_type(graph.node(edge.dst).type);
    if (!src || !dst) continue;  // already reported as an illegal node type
    const bool legal = edge.type == kContains ? containment_allowed(*src, *dst)
                                              : control_allowed(*src, *dst);
    if (!legal) {
      out.push_back({ViolationKind::kHierarchyRule, subject,
                     std::string(to_string(*src)) + " " + edge.type + " " +
                         std::string(to_string(*dst)) + " is not permitted"});
    }
  }
  return out;
}

CpGraph parse_topology(std::string_view text) {
  CpGraph graph;
  std::size_t records = 0;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": " + why);
  };

  for (const auto& raw : text::split_lines(text)) {
    ++line_no;
    const std::string line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> words;
    for (std::string w; fields >> w;) words.push_back(w);

    try {
      if (words[0] == "node") {
        if (words.size() < 3) fail("node record needs a name and a type");
        Node node{words[2], {}};
        for (std::size_t i = 3; i < words.size(); ++i) {
          const auto eq = words[i].find('=');
          if (eq == std::string::npos || eq == 0) fail("attribute '" + words[i] + "' is not key=value");
          const std::string key = words[i].substr(0, eq);
          const std::string value = words[i].substr(eq + 1);
          if (is_integer(value)) {
            node.attrs[key] = static_cast<std::int64_t>(std::stoll(value));
          } else {
            node.attrs[key] = value;
          }
        }
        graph.add_node(words[1], std::move(node));
      } else if (words[0] == "edge") {
        if (words.size() != 4) fail("edge record needs src, dst and type");
        graph.add_edge(Edge{words[1], words[2], words[3]});
      } else {
        fail("unknown record '" + words[0] + "'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParseError) throw;
      fail(e.what());
    }
    ++records;
  }
  if (records == 0) throw Error(ErrorCode::kParseError, "topology has no records");

  const auto violations = check_safety_cp(graph);
  if (!violations.empty()) {
    std::string report = std::to_string(violations.size()) + " violation(s):";
    for (const auto& v : violations) {
      report += "\n  " + std::string(to_string(v.kind)) + " " + v.subject + ": " + v.detail;
    }
    throw Error(ErrorCode::kInvariantViolation, report);
  }
  return graph;
}

CpGraph load_topology(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open topology " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_topology(buffer.str());
}

std::string format_topology(const CpGraph& graph) {
  std::string out;
  for (const auto& [name, node] : graph.nodes()) {
    out += "node " + name + " " + node.type;
    for (const auto& [key, value] : node.attrs) {
      out += " " + key + "=";
      if (const auto* i = std::get_if<std::int64_t>(&value)) {
        out += std::to_string(*i);
      } else {
        out += std::get<std::string>(value);
      }
    }
    out += "\n";
  }
  for (const auto& edge : graph.edges()) {
    out += "edge " + edge.src + " " + edge.dst + " " + edge.type + "\n";
  }
  return out;
}

CpGraph generate_synthetic_topology(const TopologySpec& spec, std::uint64_t seed) {
  for (int count : {spec.jupiters, spec.super_blocks, spec.agg_blocks, spec.control_points,
                    spec.switches, spec.ports, spec.spine_blocks, spec.spine_switches}) {
    if (count < 1 || count > 1000) {
      throw Error(ErrorCode::kParameterOutOfRange, "topology counts must lie in 1..1000");
    }
  }

  Rng rng(seed);
  CpGraph g;
  const std::string contains(kContains);
  const std::string control(kControl);
  auto node = [&](const std::string& name, NodeType type) { g.add_node(name, Node{type_name(type), {}}); };
  auto add_ports = [&](const std::string& sw) {
    for (int p = 1; p <= spec.ports; ++p) {
      const std::string port = sw + ".p" + std::to_string(p);
      g.add_node(port, Node{type_name(NodeType::kPort),
                            {{std::string(kCapacityAttr), rng.pick(kPortSpeeds)}}});
      g.add_edge({sw, port, contains});
    }
  };

  for (int j = 1; j <= spec.jupiters; ++j) {
    const std::string ju = "ju" + std::to_string(j);
    node(ju, NodeType::kJupiter);

    for (int b = 1; b <= spec.super_blocks; ++b) {
      const std::string sb = ju + ".sb" + std::to_string(b);
      node(sb, NodeType::kSuperBlock);
      g.add_edge({ju, sb, contains});
    }

    for (int a = 1; a <= spec.agg_blocks; ++a) {
      const std::string agg = ju + ".a" + std::to_string(a);
      node(agg, NodeType::kAggBlock);
      g.add_edge({ju + ".sb" + std::to_string((a - 1) % spec.super_blocks + 1), agg, contains});

      const std::string dom = agg + ".dom";
      const std::string rack = agg + ".r1";
      const std::string chassis = rack + ".ch1";
      node(dom, NodeType::kControlDomain);
      node(rack, NodeType::kRack);
      node(chassis, NodeType::kChassis);
      g.add_edge({rack, chassis, contains});

      for (int m = 1; m <= spec.control_points; ++m) {
        const std::string cp = agg + ".m" + std::to_string(m);
        node(cp, NodeType::kControlPoint);
        g.add_edge({dom, cp, contains});
        g.add_edge({dom, cp, control});
        g.add_edge({chassis, cp, contains});
      }

      for (int i = 1; i <= spec.switches; ++i) {
        const std::string cp = agg + ".m" + std::to_string((i - 1) % spec.control_points + 1);
        const std::string sw = cp + ".s" + std::to_string(rng.between(1, 3)) + "c" + std::to_string(i);
        g.add_node(sw, Node{type_name(NodeType::kPacketSwitch), {{std::string(kSwitchLocAttr), cp}}});
        g.add_edge({agg, sw, contains});
        g.add_edge({cp, sw, contains});
        g.add_edge({cp, sw, control});
        add_ports(sw);
      }
    }

    for (int s = 1; s <= spec.spine_blocks; ++s) {
      const std::string spine = ju + ".s" + std::to_string(s);
      node(spine, NodeType::kSpineBlock);
      g.add_edge({ju, spine, contains});
      for (int k = 1; k <= spec.spine_switches; ++k) {
        const std::string sw = spine + ".c" + std::to_string(k);
        g.add_node(sw, Node{type_name(NodeType::kPacketSwitch), {{std::string(kSwitchLocAttr), spine}}});
        g.add_edge({spine, sw, contains});
        add_ports(sw);
      }
    }
  }
  return g;
}

}  // namespace netbench::cp
