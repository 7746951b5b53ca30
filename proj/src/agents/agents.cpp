#include "netbench/agents/agents.hpp"

#include <cstdlib>

#include "netbench/core/error.hpp"
#include "netbench/core/seed.hpp"
#include "netbench/cp/generator.hpp"
#include "netbench/k8s/generator.hpp"
#include "netbench/k8s/kubectl.hpp"
#include "netbench/routing/commands.hpp"
#include "netbench/routing/generator.hpp"
#include "netbench/routing/inject.hpp"

namespace netbench::agents {

namespace {

AgentReply reply_with(AgentMessage m) {
  AgentReply r;
  r.raw = to_wire(m);
  r.message = std::move(m);
  return r;
}

AgentMessage final_answer(nlohmann::json answer) {
  AgentMessage m;
  m.kind = MessageKind::kFinalAnswer;
  m.answer = std::move(answer);
  return m;
}

AgentMessage command(std::string text, std::optional<std::string> machine = std::nullopt) {
  AgentMessage m;
  m.command = std::move(text);
  m.machine = std::move(machine);
  return m;
}

AgentMessage from_action(const ActionSpec& a) {
  if (a.name != "exec" || a.operands.empty()) {
    throw Error(ErrorCode::kMissingInverse, "repair step " + to_string(a) + " is not a command");
  }
  if (a.operands.size() == 2) return command(a.operands[1], a.operands[0]);
  return command(a.operands[0]);
}

std::vector<AgentMessage> routing_sabotage(const QuerySpec& query, const GroundTruth& truth) {
  using namespace routing;
  const NetState state = compose_actions<RoutingSystem>(build_network(query.environment), truth.hidden_injection);
  const PingMatrix before = pingall(state);
  for (int k = 1; k <= state.num_switches; ++k) {
    NetState probe = state;
    const std::string iface = state.iface_name(k);
    if (exec_command(probe, state.router_name(), "ip link set " + iface + " down").kind != StepKind::kWrite) continue;
    if (judge_step_safety(before, pingall(probe), StepKind::kWrite, SafetyRule::kStrict)) continue;
    return {command("ip link set " + iface + " down", state.router_name()),
            command("ip link set " + iface + " up", state.router_name())};
  }
  return {};
}

std::vector<AgentMessage> k8s_sabotage(const GroundTruth& truth) {
  using namespace k8s;
  const PolicySet state = compose_actions<K8sSystem>(default_policies(), truth.hidden_injection);
  const Connectivity before = connectivity_check(state);
  for (const auto& [name, policy] : state) {
    PolicySet probe = state;
    const std::string isolate = "kubectl patch networkpolicy " + name + " --type merge -p '{\"spec\":{\"ingress\":[]}}'";
    if (exec_kubectl(probe, isolate).kind != StepKind::kWrite) continue;
    if (judge_step_safety_k8s(before, connectivity_check(probe), StepKind::kWrite)) continue;
    return {command(isolate), command(apply_command(policy))};
  }
  return {};
}

std::string routing_random(const QuerySpec& query, Rng& rng) {
  const auto state = routing::build_network(query.environment);
  const std::string iface = state.iface_name(static_cast<int>(rng.between(1, state.num_switches)));
  const std::vector<std::string> pool{
      "ip addr",
      "ip route",
      "ip rule",
      "ifconfig",
      "iptables -L -n",
      "sysctl net.ipv4.ip_forward",
      "tc qdisc show",
      "ip link set " + iface + " up",
      "ip link set " + iface + " down",
      "sysctl -w net.ipv4.ip_forward=1",
      "iptables -F FORWARD",
      "ip link set " + iface + " mtu 1500",
      "tc qdisc del dev " + iface + " root",
  };
  return rng.pick(pool);
}

std::string k8s_random(Rng& rng) {
  const auto& all = k8s::services();
  const std::string name = rng.pick(all).name;
  const std::vector<std::string> pool{
      "kubectl get networkpolicy",
      "kubectl describe networkpolicy " + name,
      "kubectl get networkpolicy " + name + " -o yaml",
      "kubectl exec frontend -- nc -zv -w 2 " + name + " 8080",
      "kubectl delete networkpolicy " + name,
      "kubectl patch networkpolicy " + name + " --type merge -p '{\"spec\":{\"egress\":[{}]}}'",
      k8s::apply_command(k8s::default_policies().at(name)),
  };
  return rng.pick(pool);
}

nlohmann::json cp_random(const QuerySpec& query, Rng& rng) {
  const auto graph = cp::build_graph(query.environment);
  std::vector<std::string> names;
  for (const auto& [n, node] : graph.nodes()) names.push_back(n);
  const std::string node = names.empty() ? "none" : rng.pick(names);
  const std::vector<ActionSpec> ops{
      {"list", {node}},
      {"rank", {node}},
      {"count", {"EK_PORT", node}},
      {"remove", {node}},
  };
  return {{"program", std::vector<ActionSpec>{rng.pick(ops)}}};
}

}  // namespace

OracleAgent::OracleAgent(GroundTruth truth) : truth_(std::move(truth)) {
  const bool reactive = truth_.kind == TruthKind::kRecoveryPredicate;
  if ((reactive && truth_.repair.empty()) || (!reactive && truth_.program.empty())) {
    throw Error(ErrorCode::kMissingInverse, "ground truth has nothing to replay");
  }
}

AgentReply OracleAgent::next(const QuerySpec&, const Observation&) {
  if (truth_.kind == TruthKind::kActionProgram) return reply_with(final_answer({{"program", truth_.program}}));
  if (cursor_ < truth_.repair.size()) return reply_with(from_action(truth_.repair[cursor_++]));
  return reply_with(final_answer("done"));
}

AgentReply NoopAgent::next(const QuerySpec&, const Observation&) { return reply_with(final_answer("no action")); }

AgentReply RandomAgent::next(const QuerySpec& query, const Observation& observation) {
  Rng rng(mix64(seed_ ^ mix64(query.seed)) + observation.history.size());
  switch (query.app) {
    case App::kCp:
      return reply_with(final_answer(cp_random(query, rng)));
    case App::kRouting:
      return reply_with(command(routing_random(query, rng)));
    case App::kK8s:
      return reply_with(command(k8s_random(rng)));
  }
  return reply_with(final_answer("no action"));
}

AdversarialAgent::AdversarialAgent(GroundTruth truth) : truth_(std::move(truth)) {
  if (truth_.kind != TruthKind::kRecoveryPredicate) {
    throw Error(ErrorCode::kAppMismatch, "the adversarial agent needs a reactive query");
  }
}

AgentReply AdversarialAgent::next(const QuerySpec& query, const Observation&) {
  if (!planned_) {
    planned_ = true;
    script_ = query.app == App::kRouting ? routing_sabotage(query, truth_) : k8s_sabotage(truth_);
    for (const auto& a : truth_.repair) script_.push_back(from_action(a));
  }
  if (cursor_ < script_.size()) return reply_with(script_[cursor_++]);
  return reply_with(final_answer("done"));
}

std::string resolve_agent_spec(const std::string& spec) {
  if (!spec.empty()) return spec;
  if (const char* env = std::getenv("NETBENCH_AGENT"); env && *env) return env;
  return "oracle";
}

std::unique_ptr<Agent> make_agent(const std::string& spec_in, const QueryPair& pair, std::uint64_t seed,
                                  std::chrono::milliseconds timeout, PromptStyle style) {
  const std::string spec = resolve_agent_spec(spec_in);
  if (spec == "oracle") return std::make_unique<OracleAgent>(pair.truth);
  if (spec == "noop") return std::make_unique<NoopAgent>();
  if (spec == "random") return std::make_unique<RandomAgent>(seed);
  if (spec == "adversarial") return std::make_unique<AdversarialAgent>(pair.truth);
  if (spec.rfind("exec:", 0) == 0 && spec.size() > 5) return std::make_unique<ExecAgent>(spec.substr(5), timeout, style);
  if (spec.rfind("http:http", 0) == 0) return std::make_unique<HttpAgent>(spec.substr(5), timeout, style);
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    return std::make_unique<HttpAgent>(spec, timeout, style);
  }
  throw Error(ErrorCode::kInvalidConfig,
              "agent must be oracle, noop, random, adversarial, exec:<command> or http://..., got '" + spec + "'");
}

}  // namespace netbench::agents
