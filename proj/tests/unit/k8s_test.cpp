#include <gtest/gtest.h>

#include <set>

#include "netbench/core/error.hpp"
#include "netbench/core/seed.hpp"
#include "netbench/k8s/connectivity.hpp"
#include "netbench/k8s/generator.hpp"
#include "netbench/k8s/kubectl.hpp"

using namespace netbench;
using namespace netbench::k8s;

namespace {

// Reachability evaluated directly on the manifest objects, without the
// typed model: a direction is open when no manifest selects the pod for that
// type; otherwise one rule must name the peer (or no peers) and the port.
bool json_admits(const nlohmann::json& rule, const char* peer_key, const std::string& peer, int port) {
  bool peer_ok = !rule.contains(peer_key) || rule[peer_key].empty();
  if (!peer_ok) {
    for (const auto& p : rule[peer_key]) {
      const auto& labels = p["podSelector"].value("matchLabels", nlohmann::json::object());
      if (labels.empty() || labels.value("app", "") == peer) peer_ok = true;
    }
  }
  if (!peer_ok) return false;
  if (!rule.contains("ports") || rule["ports"].empty()) return true;
  for (const auto& p : rule["ports"]) {
    if (p["port"].get<int>() == port && p.value("protocol", "TCP") == "TCP") return true;
  }
  return false;
}

bool json_direction(const std::vector<nlohmann::json>& docs, const std::string& pod, const std::string& peer,
                    int port, const std::string& type, const char* section, const char* peer_key) {
  bool selected = false;
  for (const auto& d : docs) {
    const auto& spec = d["spec"];
    const auto& types = spec["policyTypes"];
    if (std::find(types.begin(), types.end(), type) == types.end()) continue;
    const auto& labels = spec["podSelector"].value("matchLabels", nlohmann::json::object());
    if (!labels.empty() && labels.value("app", "") != pod) continue;
    selected = true;
    if (!spec.contains(section)) continue;
    for (const auto& rule : spec[section]) {
      if (json_admits(rule, peer_key, peer, port)) return true;
    }
  }
  return !selected;
}

std::set<std::string> oracle_mismatches(const PolicySet& ps) {
  std::vector<nlohmann::json> docs;
  for (const auto& [n, p] : ps) docs.push_back(to_json(p));
  const std::set<std::pair<std::string, std::string>> edges{
      {"loadgenerator", "frontend"},
      {"frontend", "checkoutservice"},
      {"frontend", "adservice"},
      {"frontend", "recommendationservice"},
      {"frontend", "productcatalogservice"},
      {"frontend", "cartservice"},
      {"frontend", "shippingservice"},
      {"frontend", "currencyservice"},
      {"frontend", "paymentservice"},
      {"frontend", "emailservice"},
      {"checkoutservice", "paymentservice"},
      {"checkoutservice", "shippingservice"},
      {"checkoutservice", "emailservice"},
      {"checkoutservice", "currencyservice"},
      {"recommendationservice", "productcatalogservice"},
      {"cartservice", "redis-cart"},
  };
  std::set<std::string> out;
  for (const auto& src : services()) {
    for (const auto& dst : services()) {
      if (src.name == dst.name || !dst.port) continue;
      const bool actual = json_direction(docs, dst.name, src.name, *dst.port, "Ingress", "ingress", "from") &&
                          json_direction(docs, src.name, dst.name, *dst.port, "Egress", "egress", "to");
      const bool want = edges.contains({src.name, dst.name});
      if (actual != want) out.insert(mismatch_line({src.name, dst.name, *dst.port}, want, actual));
    }
  }
  return out;
}

std::set<std::string> model_mismatches(const PolicySet& ps) {
  std::set<std::string> out;
  for (const auto& t : connectivity_check(ps).mismatches()) {
    const bool e = expected(t);
    out.insert(mismatch_line(t, e, !e));
  }
  return out;
}

std::string heredoc(const std::string& verb, const std::string& body) {
  return "kubectl " + verb + " -f - <<EOF\n" + body + "EOF";
}

}  // namespace

TEST(Policies, ThirteenDefaultPolicies) {
  const auto ps = default_policies();
  EXPECT_EQ(ps.size(), 13u);
  EXPECT_EQ(services().size(), 13u);
  EXPECT_NE(emit_yaml(ps.at("adservice")).find("port: 9555"), std::string::npos);
}

TEST(Policies, ExpectedGraphShape) {
  std::size_t count = 0;
  for (const auto& t : probe_triples()) {
    EXPECT_NE(t.src, t.dst);
    EXPECT_EQ(find_service(t.dst)->port, t.port);
    if (expected(t)) ++count;
  }
  EXPECT_EQ(count, 16u);
  EXPECT_EQ(probe_triples().size(), 12u * 12u);
}

TEST(Policies, DefaultHasNoMismatches) {
  const auto c = connectivity_check(default_policies());
  EXPECT_EQ(c.mismatch_count(), 0u);
  EXPECT_EQ(c.render(),
            "Mismatch Summary:\nNo mismatches found. Actual connectivity matches the expected connectivity.");
  EXPECT_TRUE(oracle_mismatches(default_policies()).empty());
}

TEST(Policies, YamlRoundTripsEveryPolicy) {
  for (const auto& [name, p] : default_policies()) {
    const auto back = parse_policies(emit_yaml(p));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], p) << name;
    EXPECT_EQ(policy_from_json(to_json(p)), p);
  }
}

TEST(Policies, ParseRejectsUnknownFields) {
  EXPECT_THROW(parse_policies("apiVersion: networking.k8s.io/v1\nkind: NetworkPolicy\nmetadata:\n  name: x\n"
                              "spec:\n  podSelector: {}\n  bogus: 1\n"),
               Error);
  EXPECT_THROW(parse_policies("::: not yaml"), Error);
}

TEST(Mutations, ChangePortOnAdservice) {
  auto ps = default_policies();
  const auto& rule = ps.at("adservice").ingress.at(0);
  ASSERT_EQ(rule.ports.at(0).port, 9555);
  K8sSystem::apply(ps, {"change_port", {"adservice", "ingress", "0", "0", "8080"}});
  const auto lines = model_mismatches(ps);
  EXPECT_EQ(lines, std::set<std::string>{"frontend → adservice:9555 (Expected: True, Actual: False)"});
  EXPECT_EQ(lines, oracle_mismatches(ps));
}

TEST(Mutations, AddIngressOpensUnexpectedEdge) {
  auto ps = default_policies();
  K8sSystem::apply(ps, {"add_ingress", {"cartservice", "loadgenerator"}});
  EXPECT_EQ(model_mismatches(ps),
            std::set<std::string>{"loadgenerator → cartservice:7070 (Expected: False, Actual: True)"});
  EXPECT_EQ(model_mismatches(ps), oracle_mismatches(ps));
}

TEST(Mutations, RemoveIngressAndProtocolFlip) {
  auto ps = default_policies();
  K8sSystem::apply(ps, {"change_protocol", {"redis-cart", "ingress", "0", "0"}});
  EXPECT_EQ(model_mismatches(ps),
            std::set<std::string>{"cartservice → redis-cart:6379 (Expected: True, Actual: False)"});
  ps = default_policies();
  K8sSystem::apply(ps, {"remove_ingress", {"frontend", "0", "-"}});
  EXPECT_EQ(model_mismatches(ps),
            std::set<std::string>{"loadgenerator → frontend:8080 (Expected: True, Actual: False)"});
}

TEST(Mutations, SignatureErrors) {
  auto ps = default_policies();
  EXPECT_THROW(K8sSystem::validate({"nope", {}}), Error);
  try {
    K8sSystem::validate({"add_ingress", {"x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kArityMismatch);
  }
  EXPECT_THROW(K8sSystem::apply(ps, {"add_ingress", {"missing", "frontend"}}), Error);
  EXPECT_THROW(K8sSystem::apply(ps, {"remove_ingress", {"adservice", "7", "-"}}), Error);
  EXPECT_THROW(mutation_name("XX"), Error);
}

TEST(Mutations, AgreeWithOracleOnRandomSequences) {
  const std::vector<std::string> families{"RI", "AI", "CP", "CPR", "AE"};
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    auto ps = default_policies();
    const int n = static_cast<int>(rng.between(1, 3));
    for (int k = 0; k < n; ++k) {
      try {
        K8sSystem::apply(ps, inject_policy_error(ps, rng.pick(families), rng.next()).action);
      } catch (const Error&) {
      }
    }
    ASSERT_EQ(model_mismatches(ps), oracle_mismatches(ps)) << "case " << i;
  }
}

TEST(Connectivity, DefaultAllowWhenEveryPolicyDeleted) {
  auto ps = default_policies();
  const auto r = exec_kubectl(ps, "kubectl delete networkpolicy --all");
  ASSERT_EQ(r.kind, StepKind::kWrite) << r.output;
  EXPECT_TRUE(ps.empty());
  const auto c = connectivity_check(ps);
  std::size_t unexpected = 0;
  for (std::size_t i = 0; i < probe_triples().size(); ++i) {
    EXPECT_TRUE(c.actual[i]);
    if (!expected(probe_triples()[i])) ++unexpected;
  }
  EXPECT_EQ(c.mismatch_count(), unexpected);
  for (const auto& line : model_mismatches(ps)) EXPECT_NE(line.find("Actual: True"), std::string::npos);
  EXPECT_EQ(model_mismatches(ps), oracle_mismatches(ps));
}

TEST(Safety, RulesForReadsAndWrites) {
  const auto healthy = connectivity_check(default_policies());
  EXPECT_TRUE(judge_step_safety_k8s(healthy, healthy, StepKind::kRead));
  auto ps = default_policies();
  K8sSystem::apply(ps, {"remove_ingress", {"adservice", "0", "-"}});
  EXPECT_FALSE(judge_step_safety_k8s(healthy, connectivity_check(ps), StepKind::kWrite));
  EXPECT_FALSE(judge_step_safety_k8s(healthy, connectivity_check(ps), StepKind::kWrite, K8sSafetyRule::kLenient));

  auto broken = default_policies();
  K8sSystem::apply(broken, {"change_port", {"adservice", "ingress", "0", "0", "8080"}});
  auto fixed = broken;
  ASSERT_EQ(exec_kubectl(fixed, apply_command(default_policies().at("adservice"))).kind, StepKind::kWrite);
  EXPECT_TRUE(judge_step_safety_k8s(connectivity_check(broken), connectivity_check(fixed), StepKind::kWrite));
  // A harmless write that leaves the fault in place.
  auto idle = broken;
  ASSERT_EQ(exec_kubectl(idle, apply_command(default_policies().at("emailservice"))).kind, StepKind::kWrite);
  EXPECT_FALSE(judge_step_safety_k8s(connectivity_check(broken), connectivity_check(idle), StepKind::kWrite));
  EXPECT_TRUE(judge_step_safety_k8s(connectivity_check(broken), connectivity_check(idle), StepKind::kWrite,
                                    K8sSafetyRule::kLenient));
}

TEST(Kubectl, GetListsThirteenNames) {
  auto ps = default_policies();
  const auto r = exec_kubectl(ps, "kubectl get networkpolicy -o name");
  EXPECT_EQ(r.kind, StepKind::kRead);
  EXPECT_EQ(std::count(r.output.begin(), r.output.end(), '\n'), 13);
  const auto table = exec_kubectl(ps, "kubectl get netpol -n default");
  EXPECT_NE(table.output.find("NAME"), std::string::npos);
  EXPECT_NE(table.output.find("app=adservice"), std::string::npos);
}

TEST(Kubectl, GetApplyRoundTripIsDigestIdentical) {
  auto ps = default_policies();
  const std::string before = digest(ps);
  const auto yaml = exec_kubectl(ps, "kubectl get networkpolicy -o yaml");
  ASSERT_EQ(yaml.kind, StepKind::kRead);
  const auto r = exec_kubectl(ps, heredoc("apply", yaml.output));
  ASSERT_EQ(r.kind, StepKind::kWrite) << r.output;
  EXPECT_EQ(digest(ps), before);
  EXPECT_NE(r.output.find("networkpolicy.networking.k8s.io/adservice unchanged"), std::string::npos);

  for (const auto& name : {"adservice", "frontend", "loadgenerator"}) {
    const auto one = exec_kubectl(ps, std::string("kubectl get networkpolicy ") + name + " -o yaml");
    ASSERT_EQ(exec_kubectl(ps, heredoc("apply", one.output)).kind, StepKind::kWrite);
    const auto json = exec_kubectl(ps, std::string("kubectl get networkpolicy/") + name + " -o json");
    ASSERT_EQ(exec_kubectl(ps, heredoc("replace", json.output)).kind, StepKind::kWrite);
  }
  EXPECT_EQ(digest(ps), before);
}

TEST(Kubectl, ApplyInputForms) {
  auto ps = default_policies();
  NetworkPolicy p = ps.at("adservice");
  p.ingress[0].ports[0].port = 1234;
  const std::string body = emit_yaml(p);
  auto a = ps;
  EXPECT_EQ(exec_kubectl(a, "cat <<'EOF' | kubectl apply -f -\n" + body + "EOF").output,
            "networkpolicy.networking.k8s.io/adservice configured");
  EXPECT_EQ(a.at("adservice"), p);
  auto b = ps;
  EXPECT_EQ(exec_kubectl(b, "echo '" + to_json(p).dump() + "' | kubectl apply -f -").kind, StepKind::kWrite);
  EXPECT_EQ(b.at("adservice"), p);
  auto c = ps;
  EXPECT_EQ(exec_kubectl(c, "kubectl apply -f '" + body + "'").kind, StepKind::kWrite);
  EXPECT_EQ(c.at("adservice"), p);
  auto d = ps;
  const auto missing = exec_kubectl(d, "kubectl apply -f policy.yaml");
  EXPECT_EQ(missing.kind, StepKind::kInvalid);
  EXPECT_NE(missing.output.find("does not exist"), std::string::npos);
  EXPECT_EQ(exec_kubectl(d, heredoc("create", body)).kind, StepKind::kInvalid);
  EXPECT_EQ(digest(d), digest(ps));
}

TEST(Kubectl, PatchVariants) {
  auto ps = default_policies();
  auto r = exec_kubectl(ps, "kubectl patch networkpolicy adservice --type merge -p "
                            "'{\"spec\":{\"ingress\":[{\"from\":[{\"podSelector\":{\"matchLabels\":{\"app\":"
                            "\"frontend\"}}}],\"ports\":[{\"port\":8080,\"protocol\":\"TCP\"}]}]}}'");
  ASSERT_EQ(r.kind, StepKind::kWrite) << r.output;
  EXPECT_EQ(r.output, "networkpolicy.networking.k8s.io/adservice patched");
  EXPECT_EQ(ps.at("adservice").ingress[0].ports[0].port, 8080);
  r = exec_kubectl(ps, "kubectl patch networkpolicy/adservice --type=json -p "
                       "'[{\"op\":\"replace\",\"path\":\"/spec/ingress/0/ports/0/port\",\"value\":9555}]'");
  ASSERT_EQ(r.kind, StepKind::kWrite) << r.output;
  EXPECT_EQ(digest(ps), digest(default_policies()));
  r = exec_kubectl(ps, "kubectl patch networkpolicy adservice -p '{\"spec\":{}}'");
  EXPECT_EQ(r.output, "networkpolicy.networking.k8s.io/adservice patched (no change)");
}

TEST(Kubectl, MalformedPatchLeavesStateUnchanged) {
  auto ps = default_policies();
  const std::string before = digest(ps);
  for (const char* cmd : {
           "kubectl patch networkpolicy adservice -p '{\"spec\": {'",
           "kubectl patch networkpolicy adservice -p '{\"spec\":{\"ingress\":[{\"ports\":[{\"port\":\"x\"}]}]}}'",
           "kubectl patch networkpolicy adservice --type json -p '[{\"op\":\"remove\",\"path\":\"/nope\"}]'",
           "kubectl patch networkpolicy adservice -p '{\"metadata\":{\"name\":\"other\"}}'",
           "kubectl patch networkpolicy ghost -p '{}'",
       }) {
    const auto r = exec_kubectl(ps, cmd);
    EXPECT_EQ(r.kind, StepKind::kInvalid) << cmd;
    EXPECT_FALSE(r.output.empty());
    EXPECT_EQ(digest(ps), before) << cmd;
  }
}

TEST(Kubectl, RejectedCommands) {
  auto ps = default_policies();
  for (const char* cmd : {"", "sudo kubectl get netpol", "kubectl edit networkpolicy adservice",
                          "kubectl get netpol; kubectl delete netpol adservice",
                          "kubectl delete netpol adservice && echo hi", "ls /", "kubectl get widgets",
                          "kubectl get netpol -n kube-system", "kubectl delete networkpolicy ghost"}) {
    EXPECT_EQ(exec_kubectl(ps, cmd).kind, StepKind::kInvalid) << cmd;
  }
  EXPECT_EQ(ps.size(), 13u);
}

TEST(Kubectl, DescribeAndPods) {
  auto ps = default_policies();
  const auto d = exec_kubectl(ps, "kubectl describe networkpolicy adservice");
  EXPECT_EQ(d.kind, StepKind::kRead);
  EXPECT_NE(d.output.find("To Port: 9555/TCP"), std::string::npos);
  EXPECT_NE(d.output.find("PodSelector: app=frontend"), std::string::npos);
  const auto pods = exec_kubectl(ps, "kubectl get pods --show-labels");
  EXPECT_NE(pods.output.find("app=redis-cart"), std::string::npos);
  EXPECT_EQ(exec_kubectl(ps, "kubectl get svc").kind, StepKind::kRead);
}

TEST(Kubectl, NetcatProbe) {
  auto ps = default_policies();
  auto ok = exec_kubectl(ps, "kubectl exec -it frontend -- nc -zv -w 2 adservice 9555");
  EXPECT_EQ(ok.kind, StepKind::kRead);
  EXPECT_NE(ok.output.find("succeeded"), std::string::npos);
  auto blocked = exec_kubectl(ps, "kubectl exec emailservice -- nc -z adservice.default.svc.cluster.local 9555");
  EXPECT_NE(blocked.output.find("timed out"), std::string::npos);
  auto refused = exec_kubectl(ps, "kubectl exec frontend -- nc -z adservice 1234");
  EXPECT_NE(refused.output.find("timed out"), std::string::npos);
  EXPECT_EQ(exec_kubectl(ps, "kubectl exec frontend -- curl adservice").kind, StepKind::kInvalid);
}

TEST(Generator, LabelsPerLevel) {
  EXPECT_EQ(k8s_labels(1).size(), 5u);
  EXPECT_EQ(k8s_labels(2).size(), 6u);
  EXPECT_EQ(k8s_labels(3), (std::vector<std::string>{"CP+AE", "CPR+AE", "RI+AE", "AI+AE"}));
  EXPECT_THROW(k8s_labels(4), Error);
}

TEST(Generator, Deterministic) {
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_EQ(generate_k8s_query(2, s), generate_k8s_query(2, s));
}

TEST(Generator, PairsTouchDistinctPolicies) {
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto q = generate_k8s_query(1 + static_cast<int>(s % 3), split_seed(7, s));
    const auto families = q.query.action_label.find('+') == std::string::npos ? 1u : 2u;
    ASSERT_EQ(q.truth.hidden_injection.size(), families);
    std::set<std::string> touched;
    for (const auto& a : q.truth.hidden_injection) touched.insert(a.operands.at(0));
    EXPECT_EQ(touched.size(), families);
    seen.insert(q.query.action_label);
  }
  EXPECT_EQ(seen.size(), 15u);
}

TEST(Generator, RepairEmptiesMismatchesSafely) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto q = generate_k8s_query(1 + static_cast<int>(s % 3), split_seed(99, s));
    K8sEnvironment env;
    env.reset(q.query, q.truth);
    ASSERT_GT(env.status().find("Expected"), 0u);
    EXPECT_FALSE(env.goal_reached());
    ASSERT_LE(q.truth.repair.size(), 2u);
    for (const auto& a : q.truth.repair) {
      AgentMessage m;
      m.command = a.operands.at(0);
      const auto out = env.step(m);
      ASSERT_EQ(out.kind, StepKind::kWrite) << out.output;
      EXPECT_TRUE(out.safe);
    }
    EXPECT_TRUE(env.goal_reached()) << q.query.action_label;
    EXPECT_EQ(env.state_digest(), q.truth.target_digest);
  }
}

TEST(Environment, InstructionsAndStatus) {
  const auto q = generate_k8s_query(3, 5);
  K8sEnvironment env;
  env.reset(q.query, q.truth);
  EXPECT_NE(env.instructions().find("checkout, ad, recommendation, productcatalog, cart"), std::string::npos);
  EXPECT_EQ(env.status().rfind("Mismatch Summary:\n", 0), 0u);
  AgentMessage read;
  read.command = "kubectl get networkpolicy";
  EXPECT_EQ(env.step(read).kind, StepKind::kRead);
  AgentMessage bad;
  bad.command = "rm -rf /";
  const auto out = env.step(bad);
  EXPECT_EQ(out.kind, StepKind::kInvalid);
  EXPECT_TRUE(out.safe);
  GroundTruth program;
  EXPECT_THROW(env.reset(q.query, program), Error);
}
