#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace netbench::k8s {

struct Service {
  std::string name;
  std::optional<int> port;  // loadgenerator serves nothing
  std::string protocol = "TCP";
};

/// The 13 pods of the shop: 11 application services, loadgenerator and
/// redis-cart, in a fixed order. Each pod carries the label app=<name>.
const std::vector<Service>& services();
const Service* find_service(std::string_view name);

struct Triple {
  std::string src;
  std::string dst;
  int port = 0;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Every (src, dst, dst serving port) with src != dst, sorted.
const std::vector<Triple>& probe_triples();
/// The intended allow-set.
bool expected(const Triple& triple);

struct PortRule {
  int port = 0;
  std::string protocol = "TCP";
  friend bool operator==(const PortRule&, const PortRule&) = default;
};

/// A podSelector; empty labels select every pod.
struct Selector {
  std::map<std::string, std::string> match_labels;
  bool matches(const std::string& app) const;
  friend bool operator==(const Selector&, const Selector&) = default;
};

/// One ingress (from) or egress (to) rule. Empty peers or empty ports mean
/// "any".
struct Rule {
  std::vector<Selector> peers;
  std::vector<PortRule> ports;
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct NetworkPolicy {
  std::string name;
  Selector pod_selector;
  bool ingress_type = true;
  bool egress_type = false;
  std::vector<Rule> ingress;
  std::vector<Rule> egress;
  friend bool operator==(const NetworkPolicy&, const NetworkPolicy&) = default;
};

/// Keyed by policy name.
using PolicySet = std::map<std::string, NetworkPolicy>;

/// One policy per pod, named after it. Evaluates to exactly the expected
/// allow-set.
PolicySet default_policies();

/// Object form used for YAML emission and for patches.
nlohmann::json to_json(const NetworkPolicy& policy);
/// Throws kParseError naming the offending field.
NetworkPolicy policy_from_json(const nlohmann::json& object);

/// Canonical block YAML; parse_policies(emit_yaml(p)) == p.
std::string emit_yaml(const NetworkPolicy& policy);
std::string emit_yaml(const PolicySet& policies);
/// Accepts one or more "---"-separated documents, each a NetworkPolicy or a
/// List of them. Throws kParseError.
std::vector<NetworkPolicy> parse_policies(std::string_view yaml);
/// YAML (or JSON) text to a JSON value. Throws kParseError.
nlohmann::json yaml_to_json(std::string_view yaml);

std::string digest(const PolicySet& policies);

}  // namespace netbench::k8s
