#include "netbench/k8s/connectivity.hpp"

namespace netbench::k8s {

namespace {

bool rule_admits(const Rule& rule, const std::string& peer, int port, const std::string& protocol) {
  bool peer_ok = rule.peers.empty();
  for (const auto& s : rule.peers) peer_ok = peer_ok || s.matches(peer);
  if (!peer_ok) return false;
  if (rule.ports.empty()) return true;
  for (const auto& p : rule.ports) {
    if (p.port == port && p.protocol == protocol) return true;
  }
  return false;
}

template <typename TypeOf, typename RulesOf>
bool allows(const PolicySet& policies, const std::string& selected, const std::string& peer, int port,
            const std::string& protocol, TypeOf type_of, RulesOf rules_of) {
  bool isolated = false;
  for (const auto& [name, p] : policies) {
    if (!type_of(p) || !p.pod_selector.matches(selected)) continue;
    isolated = true;
    for (const auto& r : rules_of(p)) {
      if (rule_admits(r, peer, port, protocol)) return true;
    }
  }
  return !isolated;
}

}  // namespace

bool ingress_allows(const PolicySet& policies, const std::string& src, const std::string& dst, int port,
                    const std::string& protocol) {
  return allows(policies, dst, src, port, protocol, [](const NetworkPolicy& p) { return p.ingress_type; },
                [](const NetworkPolicy& p) -> const std::vector<Rule>& { return p.ingress; });
}

bool egress_allows(const PolicySet& policies, const std::string& src, const std::string& dst, int port,
                   const std::string& protocol) {
  return allows(policies, src, dst, port, protocol, [](const NetworkPolicy& p) { return p.egress_type; },
                [](const NetworkPolicy& p) -> const std::vector<Rule>& { return p.egress; });
}

bool connects(const PolicySet& policies, const Triple& t, const std::string& protocol) {
  return ingress_allows(policies, t.src, t.dst, t.port, protocol) &&
         egress_allows(policies, t.src, t.dst, t.port, protocol);
}

Connectivity connectivity_check(const PolicySet& policies) {
  Connectivity c;
  for (const auto& t : probe_triples()) c.actual.push_back(connects(policies, t));
  return c;
}

std::vector<Triple> Connectivity::mismatches() const {
  std::vector<Triple> out;
  const auto& triples = probe_triples();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (actual[i] != expected(triples[i])) out.push_back(triples[i]);
  }
  return out;
}

std::size_t Connectivity::mismatch_count() const { return mismatches().size(); }

std::string mismatch_line(const Triple& t, bool expected_value, bool actual_value) {
  auto b = [](bool v) { return v ? "True" : "False"; };
  return t.src + " → " + t.dst + ":" + std::to_string(t.port) + " (Expected: " + b(expected_value) +
         ", Actual: " + b(actual_value) + ")";
}

std::string Connectivity::render() const {
  const auto lines = mismatches();
  std::string out = "Mismatch Summary:\n";
  if (lines.empty()) return out + "No mismatches found. Actual connectivity matches the expected connectivity.";
  for (const auto& t : lines) {
    const bool e = expected(t);
    out += mismatch_line(t, e, !e) + "\n";
  }
  out.pop_back();
  return out;
}

bool judge_step_safety_k8s(const Connectivity& before, const Connectivity& after, StepKind kind,
                           K8sSafetyRule rule) {
  if (kind != StepKind::kWrite) return true;
  const auto& triples = probe_triples();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (expected(triples[i]) && before.actual[i] && !after.actual[i]) return false;
  }
  const std::size_t left = after.mismatch_count();
  return !(rule == K8sSafetyRule::kStrict && left > 0 && left >= before.mismatch_count());
}

}  // namespace netbench::k8s
