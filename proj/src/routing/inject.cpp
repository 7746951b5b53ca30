#include "netbench/routing/inject.hpp"

#include <array>

#include "netbench/core/error.hpp"
#include "netbench/core/seed.hpp"
#include "netbench/routing/commands.hpp"
#include "netbench/routing/pingall.hpp"

namespace netbench::routing {

namespace {

constexpr std::array<int, 5> kMasks{8, 16, 30, 31, 32};

struct FamilyInfo {
  Family family;
  std::string_view label;
  std::string_view name;
  int methods;
};

constexpr std::array<FamilyInfo, 5> kFamilies{{
    {Family::kDisableRouting, "DR", "disable_routing", 4},
    {Family::kDisableInterface, "DI", "disable_interface", 3},
    {Family::kRemoveIp, "RI", "remove_ip", 4},
    {Family::kDropTraffic, "DT", "drop_traffic", 4},
    {Family::kWrongRouting, "WR", "wrong_routing", 4},
}};

const FamilyInfo& info(Family family) {
  for (const auto& f : kFamilies) {
    if (f.family == family) return f;
  }
  throw Error(ErrorCode::kUnknownFamily, "unknown error family");
}

std::string subnet(int k) { return "192.168." + std::to_string(k) + ".0/24"; }
std::string addr_in(int k, int host) { return "192.168." + std::to_string(k) + "." + std::to_string(host); }

int parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidValue, "bad " + what + " '" + text + "'");
}

std::string route_spec(const Route& r) {
  std::string out = r.dest.len == 0 ? "default" : format_cidr(r.dest);
  if (r.via) out += " via " + format_ipv4(*r.via);
  if (!r.dev.empty()) out += " dev " + r.dev;
  if (r.proto != "boot") out += " proto " + r.proto;
  if (!r.scope.empty()) out += " scope " + r.scope;
  if (r.src) out += " src " + format_ipv4(*r.src);
  if (r.metric != 0) out += " metric " + std::to_string(r.metric);
  return out;
}

std::vector<Route> routes_where(const NetState& s, const Cidr& dest, const std::string& dev, bool any_metric) {
  std::vector<Route> out;
  for (const auto& r : s.routes) {
    if (r.dest == dest && (dev.empty() || r.dev == dev) && (any_metric || r.metric == 0)) out.push_back(r);
  }
  return out;
}

// Inverse of a command that replaced (dest, metric 0): put every displaced
// route back, or drop the injected route if nothing was displaced.
void restore_displaced(std::vector<std::string>& inverse, const std::vector<Route>& displaced,
                       const std::string& injected) {
  if (displaced.empty()) {
    inverse.push_back("ip route del " + injected);
    return;
  }
  inverse.push_back("ip route replace " + route_spec(displaced.front()));
  for (std::size_t i = 1; i < displaced.size(); ++i) inverse.push_back("ip route add " + route_spec(displaced[i]));
}

void run(NetState& state, const std::string& machine, const std::string& command) {
  const CommandResult result = exec_command(state, machine, command);
  if (result.kind == StepKind::kInvalid) {
    throw Error(ErrorCode::kApplicationRejected, "'" + command + "' failed: " + result.output);
  }
}

}  // namespace

std::string_view to_label(Family family) { return info(family).label; }
std::string_view action_name(Family family) { return info(family).name; }
int method_count(Family family) { return info(family).methods; }

Family parse_family(std::string_view text) {
  for (const auto& f : kFamilies) {
    if (text == f.label || text == f.name) return f.family;
  }
  if (text == "drop_traffic_to_from_subnet") return Family::kDropTraffic;
  if (text == "wrong_routing_table") return Family::kWrongRouting;
  throw Error(ErrorCode::kUnknownFamily, "unknown error family '" + std::string(text) + "'");
}

Expansion expand(const NetState& s, const ActionSpec& action) {
  const Family family = parse_family(action.name);
  if (action.operands.size() != 3) {
    throw Error(ErrorCode::kArityMismatch, action.name + " takes (method, target, value)");
  }
  const std::string& m = action.operands[0];
  const int method = m.size() == 2 && m[0] == 'm' ? m[1] - '0' : 0;
  if (method < 1 || method > method_count(family)) {
    throw Error(ErrorCode::kMethodOutOfRange, "method '" + m + "' is out of range for " + action.name);
  }

  const bool needs_target = !(family == Family::kDisableRouting && method <= 3);
  const Interface* iface = nullptr;
  if (needs_target) {
    iface = s.find_iface(action.operands[1]);
    if (!iface) throw Error(ErrorCode::kInvalidValue, "unknown interface '" + action.operands[1] + "'");
  }
  const std::string dev = iface ? iface->name : "";
  const int k = iface ? iface->index : 0;
  const std::string& value = action.operands[2];
  auto other_subnet = [&] {
    const int j = parse_int(value, "subnet");
    if (j < 1 || j > s.num_switches || j == k) throw Error(ErrorCode::kInvalidValue, "bad other subnet");
    return j;
  };

  Expansion e;
  auto& cmd = e.commands;
  auto& inv = e.inverse;
  switch (family) {
    case Family::kDisableRouting:
      if (method == 1) {
        cmd.push_back("sysctl -w net.ipv4.ip_forward=0");
        if (s.ip_forward) inv.push_back("sysctl -w net.ipv4.ip_forward=1");
      } else if (method == 2) {
        cmd.push_back("iptables -A FORWARD -j DROP");
        inv.push_back("iptables -D FORWARD -j DROP");
      } else if (method == 3) {
        cmd.push_back("ip rule add from all prohibit");
        inv.push_back("ip rule del from all prohibit");
      } else {
        cmd.push_back("iptables -A FORWARD -s " + subnet(k) + " -j DROP");
        inv.push_back("iptables -D FORWARD -s " + subnet(k) + " -j DROP");
      }
      break;

    case Family::kDisableInterface:
      if (method == 3) {
        const int mtu = parse_int(value, "mtu");
        cmd.push_back("ip link set " + dev + " mtu " + std::to_string(mtu));
        inv.push_back("ip link set " + dev + " mtu " + std::to_string(iface->mtu));
      } else {
        cmd.push_back(method == 1 ? "ifconfig " + dev + " down" : "ip link set " + dev + " down");
        if (iface->up) inv.push_back(method == 1 ? "ifconfig " + dev + " up" : "ip link set " + dev + " up");
      }
      break;

    case Family::kRemoveIp: {
      std::string wrong;
      if (method == 2) {
        wrong = "10.0.0." + std::to_string(parse_int(value, "host octet")) + "/24";
      } else if (method == 3) {
        const int mask = parse_int(value, "mask");
        if (mask < 1 || mask > 32 || mask == 24) throw Error(ErrorCode::kInvalidValue, "bad mask");
        wrong = addr_in(k, 1) + "/" + std::to_string(mask);
      } else if (method == 4) {
        wrong = addr_in(other_subnet(), 1) + "/24";
      }
      cmd.push_back("ip addr flush dev " + dev);
      if (!wrong.empty()) cmd.push_back("ip addr add " + wrong + " dev " + dev);
      for (const auto& a : iface->addrs) inv.push_back("ip addr add " + format_cidr(a) + " dev " + dev);
      if (!wrong.empty()) inv.push_back("ip addr del " + wrong + " dev " + dev);
      break;
    }

    case Family::kDropTraffic: {
      if (method == 4) {
        const int delay = parse_int(value, "delay");
        cmd.push_back("tc qdisc add dev " + dev + " root netem delay " + std::to_string(delay) + "ms");
        inv.push_back("tc qdisc del dev " + dev + " root");
        break;
      }
      const std::string match = " -s " + subnet(k) + (method == 3 ? " -p icmp" : "") +
                                (method == 2 ? " -j REJECT" : " -j DROP");
      for (const std::string chain : {"INPUT", "FORWARD"}) {
        cmd.push_back("iptables -A " + chain + match);
        inv.push_back("iptables -D " + chain + match);
      }
      break;
    }

    case Family::kWrongRouting: {
      const int j = other_subnet();
      const std::string wrong_dev = s.iface_name(j);
      const Cidr dest = *parse_cidr(subnet(k));
      if (method == 1) {
        const auto removed = routes_where(s, dest, dev, true);
        if (!removed.empty()) cmd.push_back("ip route del " + subnet(k) + " dev " + dev);
        cmd.push_back("ip route add " + subnet(k) + " dev " + wrong_dev);
        restore_displaced(inv, removed, subnet(k) + " dev " + wrong_dev);
      } else if (method == 2) {
        const std::string injected = subnet(k) + " via " + addr_in(j, 254) + " dev " + wrong_dev;
        cmd.push_back("ip route replace " + injected);
        restore_displaced(inv, routes_where(s, dest, "", false), injected);
      } else if (method == 3) {
        const auto removed = routes_where(s, dest, dev, true);
        if (!removed.empty()) cmd.push_back("ip route del " + subnet(k) + " dev " + dev);
        cmd.push_back("ip route add " + subnet(k) + " dev " + dev + " metric 9999");
        cmd.push_back("ip route add " + subnet(k) + " dev " + wrong_dev + " metric 100");
        for (const auto& r : removed) inv.push_back("ip route add " + route_spec(r));
        inv.push_back("ip route del " + subnet(k) + " dev " + dev + " metric 9999");
        inv.push_back("ip route del " + subnet(k) + " dev " + wrong_dev + " metric 100");
      } else {
        const std::string injected = subnet(k) + " via " + addr_in(j, 254);
        cmd.push_back("ip route replace " + injected);
        cmd.push_back("ip route add " + addr_in(j, 254) + "/32 via " + addr_in(k, 254));
        restore_displaced(inv, routes_where(s, dest, "", false), injected);
        inv.push_back("ip route del " + addr_in(j, 254) + "/32");
      }
      break;
    }
  }
  return e;
}

InjectionRecord inject_error(NetState& state, Family family, int method, std::uint64_t seed) {
  if (method < 1 || method > method_count(family)) {
    throw Error(ErrorCode::kMethodOutOfRange, "method " + std::to_string(method) + " is out of range for " +
                                                  std::string(to_label(family)));
  }
  Rng rng(seed);
  const int k = static_cast<int>(rng.between(1, state.num_switches));
  auto other = [&] {
    int j = static_cast<int>(rng.between(1, state.num_switches - 1));
    return j >= k ? j + 1 : j;
  };
  std::string target = state.iface_name(k);
  std::string value = "-";
  switch (family) {
    case Family::kDisableRouting:
      if (method <= 3) target = "-";
      break;
    case Family::kDisableInterface:
      if (method == 3) value = std::to_string(rng.between(68, 575));
      break;
    case Family::kRemoveIp:
      if (method == 2) value = std::to_string(rng.between(2, 254));
      if (method == 3) value = std::to_string(rng.pick(kMasks));
      if (method == 4) value = std::to_string(other());
      break;
    case Family::kDropTraffic:
      if (method == 4) value = std::to_string(rng.between(12000, 30000));
      break;
    case Family::kWrongRouting:
      value = std::to_string(other());
      break;
  }

  InjectionRecord record;
  record.action = ActionSpec{std::string(action_name(family)), {"m" + std::to_string(method), target, value}};
  Expansion e = expand(state, record.action);
  NetState next = state;
  for (const auto& c : e.commands) run(next, next.router_name(), c);
  if (pingall(next).failures() == 0) {
    throw Error(ErrorCode::kIneffectiveInjection, to_string(record.action) + " leaves pingall clean");
  }
  state = std::move(next);
  record.commands = std::move(e.commands);
  record.inverse = std::move(e.inverse);
  return record;
}

void RoutingSystem::validate(const ActionSpec& action) {
  if (action.name == "exec") {
    if (action.operands.size() != 2) throw Error(ErrorCode::kArityMismatch, "exec takes (machine, command)");
    return;
  }
  Family family;
  try {
    family = parse_family(action.name);
  } catch (const Error&) {
    throw Error(ErrorCode::kUnknownAction, "unknown routing action '" + action.name + "'");
  }
  if (action.operands.size() != 3 || action.name != action_name(family)) {
    throw Error(ErrorCode::kArityMismatch, action.name + " takes (method, target, value)");
  }
}

void RoutingSystem::apply(NetState& state, const ActionSpec& action) {
  if (action.name == "exec") {
    run(state, action.operands[0], action.operands[1]);
    return;
  }
  NetState next = state;
  for (const auto& c : expand(state, action).commands) run(next, next.router_name(), c);
  state = std::move(next);
}

}  // namespace netbench::routing
