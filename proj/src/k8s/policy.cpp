#include "netbench/k8s/policy.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <yaml-cpp/yaml.h>

#include "netbench/core/digest.hpp"
#include "netbench/core/error.hpp"

namespace netbench::k8s {

namespace {

const std::set<std::pair<std::string, std::string>>& expected_edges() {
  static const std::set<std::pair<std::string, std::string>> kEdges = [] {
    std::set<std::pair<std::string, std::string>> e;
    e.emplace("loadgenerator", "frontend");
    for (const char* dst : {"checkoutservice", "adservice", "recommendationservice", "productcatalogservice",
                            "cartservice", "shippingservice", "currencyservice", "paymentservice",
                            "emailservice"}) {
      e.emplace("frontend", dst);
    }
    for (const char* dst : {"paymentservice", "shippingservice", "emailservice", "currencyservice"}) {
      e.emplace("checkoutservice", dst);
    }
    e.emplace("recommendationservice", "productcatalogservice");
    e.emplace("cartservice", "redis-cart");
    return e;
  }();
  return kEdges;
}

// Pods whose egress is left unrestricted.
bool open_egress(const std::string& app) { return app == "frontend" || app == "loadgenerator"; }

Selector app_selector(const std::string& app) { return Selector{{{"app", app}}}; }

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kParseError, what); }

void expect_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) bad(where + ": expected a mapping");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      bad(where + ": unknown or unsupported field \"" + key + "\"");
    }
  }
}

Selector selector_from(const nlohmann::json& j, const std::string& where) {
  if (j.is_null()) return {};
  expect_keys(j, {"matchLabels"}, where);
  Selector s;
  if (j.contains("matchLabels") && !j["matchLabels"].is_null()) {
    if (!j["matchLabels"].is_object()) bad(where + ".matchLabels: expected a mapping");
    for (const auto& [k, v] : j["matchLabels"].items()) {
      if (!v.is_string()) bad(where + ".matchLabels." + k + ": expected a string");
      s.match_labels[k] = v.get<std::string>();
    }
  }
  return s;
}

Rule rule_from(const nlohmann::json& j, const char* peers_key, const std::string& where) {
  if (j.is_null()) return {};
  expect_keys(j, {peers_key, "ports"}, where);
  Rule r;
  if (j.contains(peers_key) && !j[peers_key].is_null()) {
    if (!j[peers_key].is_array()) bad(where + "." + peers_key + ": expected a list");
    for (std::size_t i = 0; i < j[peers_key].size(); ++i) {
      const auto& peer = j[peers_key][i];
      const std::string w = where + "." + peers_key + "[" + std::to_string(i) + "]";
      expect_keys(peer, {"podSelector"}, w);
      if (!peer.contains("podSelector")) bad(w + ": only podSelector peers are supported");
      r.peers.push_back(selector_from(peer["podSelector"], w + ".podSelector"));
    }
  }
  if (j.contains("ports") && !j["ports"].is_null()) {
    if (!j["ports"].is_array()) bad(where + ".ports: expected a list");
    for (std::size_t i = 0; i < j["ports"].size(); ++i) {
      const auto& p = j["ports"][i];
      const std::string w = where + ".ports[" + std::to_string(i) + "]";
      expect_keys(p, {"port", "protocol"}, w);
      if (!p.contains("port") || !p["port"].is_number_integer()) bad(w + ".port: expected an integer port number");
      PortRule pr;
      pr.port = p["port"].get<int>();
      if (pr.port < 1 || pr.port > 65535) bad(w + ".port: must be between 1 and 65535");
      if (p.contains("protocol")) {
        if (!p["protocol"].is_string()) bad(w + ".protocol: expected a string");
        pr.protocol = p["protocol"].get<std::string>();
        if (pr.protocol != "TCP" && pr.protocol != "UDP" && pr.protocol != "SCTP") {
          bad(w + ".protocol: supported values are TCP, UDP, SCTP");
        }
      }
      r.ports.push_back(pr);
    }
  }
  return r;
}

nlohmann::json scalar_to_json(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted
  if (text == "null" || text == "~" || text.empty()) return nullptr;
  if (text == "true" || text == "True") return true;
  if (text == "false" || text == "False") return false;
  const bool numeric = !text.empty() && std::all_of(text.begin() + (text[0] == '-' ? 1 : 0), text.end(),
                                                    [](char c) { return c >= '0' && c <= '9'; }) &&
                       text != "-" && text.size() < 10;
  if (numeric) return std::stoi(text);
  return text;
}

nlohmann::json node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& item : node) out.push_back(node_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      nlohmann::json out = nlohmann::json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = node_to_json(kv.second);
      return out;
    }
  }
  return nullptr;
}

std::string scalar(const std::string& v) {
  const bool plain = !v.empty() && std::isalpha(static_cast<unsigned char>(v[0])) &&
                     std::all_of(v.begin(), v.end(), [](char c) {
                       return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' || c == '/';
                     }) &&
                     v != "true" && v != "false" && v != "null" && v != "True" && v != "False";
  return plain ? v : nlohmann::json(v).dump();
}

void emit_selector(std::string& out, const Selector& s, const std::string& indent) {
  if (s.match_labels.empty()) {
    out += " {}\n";
    return;
  }
  out += "\n" + indent + "matchLabels:\n";
  for (const auto& [k, v] : s.match_labels) out += indent + "  " + scalar(k) + ": " + scalar(v) + "\n";
}

void emit_rules(std::string& out, const std::vector<Rule>& rules, const char* key, const char* peers_key) {
  if (rules.empty()) return;
  out += std::string("  ") + key + ":\n";
  for (const auto& r : rules) {
    if (r.peers.empty() && r.ports.empty()) {
      out += "  - {}\n";
      continue;
    }
    std::string lead = "  - ";
    if (!r.peers.empty()) {
      out += lead + peers_key + ":\n";
      for (const auto& p : r.peers) {
        out += "    - podSelector:";
        emit_selector(out, p, "        ");
      }
      lead = "    ";
    }
    if (!r.ports.empty()) {
      out += lead + "ports:\n";
      for (const auto& p : r.ports) {
        out += "    - port: " + std::to_string(p.port) + "\n      protocol: " + p.protocol + "\n";
      }
    }
  }
}

}  // namespace

const std::vector<Service>& services() {
  static const std::vector<Service> kServices{
      {"adservice", 9555},         {"cartservice", 7070},    {"checkoutservice", 5050},
      {"currencyservice", 7000},   {"emailservice", 5000},   {"frontend", 8080},
      {"loadgenerator", std::nullopt}, {"paymentservice", 50051}, {"productcatalogservice", 3550},
      {"recommendationservice", 8080}, {"redis-cart", 6379}, {"shippingservice", 50051},
      {"shoppingassistantservice", 80},
  };
  return kServices;
}

const Service* find_service(std::string_view name) {
  for (const auto& s : services()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const std::vector<Triple>& probe_triples() {
  static const std::vector<Triple> kTriples = [] {
    std::vector<Triple> out;
    for (const auto& src : services()) {
      for (const auto& dst : services()) {
        if (src.name != dst.name && dst.port) out.push_back({src.name, dst.name, *dst.port});
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }();
  return kTriples;
}

bool expected(const Triple& t) {
  const Service* dst = find_service(t.dst);
  return dst && dst->port == t.port && expected_edges().contains({t.src, t.dst});
}

bool Selector::matches(const std::string& app) const {
  for (const auto& [k, v] : match_labels) {
    if (k != "app" || v != app) return false;
  }
  return true;
}

PolicySet default_policies() {
  PolicySet out;
  for (const auto& svc : services()) {
    NetworkPolicy p;
    p.name = svc.name;
    p.pod_selector = app_selector(svc.name);
    p.ingress_type = true;
    p.egress_type = true;
    if (svc.port) {
      Rule in;
      in.ports.push_back({*svc.port, svc.protocol});
      for (const auto& [src, dst] : expected_edges()) {
        if (dst == svc.name) in.peers.push_back(app_selector(src));
      }
      // The storefront is public; everything else only admits its callers.
      if (svc.name == "frontend") in.peers.clear();
      if (svc.name == "frontend" || !in.peers.empty()) p.ingress.push_back(in);
    }
    if (open_egress(svc.name)) {
      p.egress.push_back(Rule{});
    } else {
      for (const auto& [src, dst] : expected_edges()) {
        if (src != svc.name) continue;
        const Service* target = find_service(dst);
        p.egress.push_back(Rule{{app_selector(dst)}, {{*target->port, target->protocol}}});
      }
    }
    out.emplace(p.name, p);
  }
  return out;
}

nlohmann::json to_json(const NetworkPolicy& p) {
  auto selector = [](const Selector& s) {
    nlohmann::json j = nlohmann::json::object();
    if (!s.match_labels.empty()) j["matchLabels"] = s.match_labels;
    return j;
  };
  auto rules = [&](const std::vector<Rule>& list, const char* peers_key) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : list) {
      nlohmann::json rj = nlohmann::json::object();
      if (!r.peers.empty()) {
        nlohmann::json peers = nlohmann::json::array();
        for (const auto& peer : r.peers) peers.push_back({{"podSelector", selector(peer)}});
        rj[peers_key] = peers;
      }
      if (!r.ports.empty()) {
        nlohmann::json ports = nlohmann::json::array();
        for (const auto& port : r.ports) ports.push_back({{"port", port.port}, {"protocol", port.protocol}});
        rj["ports"] = ports;
      }
      arr.push_back(rj);
    }
    return arr;
  };
  nlohmann::json types = nlohmann::json::array();
  if (p.ingress_type) types.push_back("Ingress");
  if (p.egress_type) types.push_back("Egress");
  nlohmann::json spec{{"podSelector", selector(p.pod_selector)}, {"policyTypes", types}};
  if (!p.ingress.empty()) spec["ingress"] = rules(p.ingress, "from");
  if (!p.egress.empty()) spec["egress"] = rules(p.egress, "to");
  return {{"apiVersion", "networking.k8s.io/v1"},
          {"kind", "NetworkPolicy"},
          {"metadata", {{"name", p.name}, {"namespace", "default"}}},
          {"spec", spec}};
}

NetworkPolicy policy_from_json(const nlohmann::json& j) {
  expect_keys(j, {"apiVersion", "kind", "metadata", "spec"}, "NetworkPolicy");
  if (j.value("kind", "") != "NetworkPolicy") bad("kind: expected NetworkPolicy");
  if (j.contains("apiVersion") && j["apiVersion"] != "networking.k8s.io/v1") {
    bad("apiVersion: expected networking.k8s.io/v1");
  }
  NetworkPolicy p;
  if (!j.contains("metadata") || !j["metadata"].is_object()) bad("metadata: required");
  const auto& meta = j["metadata"];
  if (!meta.contains("name") || !meta["name"].is_string() || meta["name"].get<std::string>().empty()) {
    bad("metadata.name: required");
  }
  p.name = meta["name"].get<std::string>();
  if (meta.contains("namespace") && meta["namespace"] != "default") {
    bad("metadata.namespace: only the default namespace exists");
  }
  const nlohmann::json spec = j.contains("spec") ? j["spec"] : nlohmann::json::object();
  expect_keys(spec, {"podSelector", "policyTypes", "ingress", "egress"}, "spec");
  p.pod_selector = selector_from(spec.value("podSelector", nlohmann::json()), "spec.podSelector");
  const bool has_egress = spec.contains("egress") && !spec["egress"].is_null();
  if (spec.contains("policyTypes") && !spec["policyTypes"].is_null()) {
    if (!spec["policyTypes"].is_array()) bad("spec.policyTypes: expected a list");
    p.ingress_type = false;
    for (const auto& t : spec["policyTypes"]) {
      if (t == "Ingress") {
        p.ingress_type = true;
      } else if (t == "Egress") {
        p.egress_type = true;
      } else {
        bad("spec.policyTypes: supported values are Ingress, Egress");
      }
    }
  } else {
    p.ingress_type = true;
    p.egress_type = has_egress;
  }
  for (const auto& [key, peers_key] : {std::pair{"ingress", "from"}, std::pair{"egress", "to"}}) {
    if (!spec.contains(key) || spec[key].is_null()) continue;
    if (!spec[key].is_array()) bad(std::string("spec.") + key + ": expected a list");
    auto& target = std::string(key) == "ingress" ? p.ingress : p.egress;
    for (std::size_t i = 0; i < spec[key].size(); ++i) {
      target.push_back(rule_from(spec[key][i], peers_key, std::string("spec.") + key + "[" + std::to_string(i) + "]"));
    }
  }
  return p;
}

std::string emit_yaml(const NetworkPolicy& p) {
  std::string out = "apiVersion: networking.k8s.io/v1\nkind: NetworkPolicy\nmetadata:\n  name: " + scalar(p.name) +
                    "\n  namespace: default\nspec:\n  podSelector:";
  emit_selector(out, p.pod_selector, "    ");
  if (!p.ingress_type && !p.egress_type) {
    out += "  policyTypes: []\n";
  } else {
    out += "  policyTypes:\n";
    if (p.ingress_type) out += "  - Ingress\n";
    if (p.egress_type) out += "  - Egress\n";
  }
  emit_rules(out, p.ingress, "ingress", "from");
  emit_rules(out, p.egress, "egress", "to");
  return out;
}

std::string emit_yaml(const PolicySet& policies) {
  std::string out;
  for (const auto& [name, p] : policies) {
    if (!out.empty()) out += "---\n";
    out += emit_yaml(p);
  }
  return out;
}

nlohmann::json yaml_to_json(std::string_view yaml) {
  try {
    return node_to_json(YAML::Load(std::string(yaml)));
  } catch (const YAML::Exception& e) {
    bad(std::string("error converting YAML to JSON: ") + e.what());
  }
}

std::vector<NetworkPolicy> parse_policies(std::string_view yaml) {
  std::vector<YAML::Node> docs;
  try {
    docs = YAML::LoadAll(std::string(yaml));
  } catch (const YAML::Exception& e) {
    bad(std::string("error converting YAML to JSON: ") + e.what());
  }
  std::vector<NetworkPolicy> out;
  for (const auto& doc : docs) {
    const nlohmann::json j = node_to_json(doc);
    if (j.is_null()) continue;
    if (j.is_object() && j.value("kind", "") == "List") {
      if (!j.contains("items") || !j["items"].is_array()) bad("List: items must be a list");
      for (const auto& item : j["items"]) out.push_back(policy_from_json(item));
    } else {
      out.push_back(policy_from_json(j));
    }
  }
  if (out.empty()) bad("no objects passed to apply");
  return out;
}

std::string digest(const PolicySet& policies) { return sha256_hex(emit_yaml(policies)); }

}  // namespace netbench::k8s
