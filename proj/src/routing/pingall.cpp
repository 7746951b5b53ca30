#include "netbench/routing/pingall.hpp"

#include <algorithm>
#include <tuple>

#include "netbench/core/error.hpp"

namespace netbench::routing {

namespace {

constexpr int kRouter = -1;
constexpr int kNowhere = -2;
constexpr int kMinMtu = 576;
constexpr int kMaxHops = 8;

struct Hop {
  std::string dev;
  Ipv4 next_hop = 0;
  std::optional<Ipv4> src;
};

struct Arrival {
  int endpoint = kNowhere;
  int delay_ms = 0;
};

class Walker {
 public:
  explicit Walker(const NetState& s) : s_(s) {}

  // Linux-style lookup: longest prefix, lowest metric, direct before gateway,
  // then device and gateway for determinism. Gateways without a device are
  // resolved recursively.
  std::optional<Hop> lookup(Ipv4 dst, int depth = 0) const {
    if (depth > kMaxHops) return std::nullopt;
    const Route* best = nullptr;
    auto key = [](const Route& r) {
      return std::make_tuple(-r.dest.len, r.metric, r.via.has_value(), r.dev, r.via.value_or(0));
    };
    for (const auto& r : s_.routes) {
      if (!r.dest.contains(dst)) continue;
      if (!r.dev.empty()) {
        const Interface* iface = s_.find_iface(r.dev);
        if (!iface || !iface->up) continue;
      }
      if (!best || key(r) < key(*best)) best = &r;
    }
    if (!best) return std::nullopt;
    if (!best->via) return Hop{best->dev, dst, best->src};
    if (!best->dev.empty()) return Hop{best->dev, *best->via, best->src};
    auto resolved = lookup(*best->via, depth + 1);
    if (!resolved) return std::nullopt;
    if (best->src) resolved->src = best->src;
    return resolved;
  }

  bool is_local(Ipv4 ip) const {
    for (const auto& iface : s_.interfaces) {
      for (const auto& a : iface.addrs) {
        if (a.addr == ip) return true;
      }
    }
    return false;
  }

  std::optional<Ipv4> source_for(const Hop& hop) const {
    if (hop.src) return hop.src;
    if (const Interface* iface = s_.find_iface(hop.dev); iface && !iface->addrs.empty()) {
      return iface->addrs.front().addr;
    }
    for (const auto& iface : s_.interfaces) {
      if (!iface.addrs.empty()) return iface.addrs.front().addr;
    }
    return std::nullopt;
  }

  bool filter(const std::string& chain, const std::string& in, const std::string& out, Ipv4 src,
              Ipv4 dst) const {
    for (const auto& r : s_.rules) {
      if (r.chain != chain) continue;
      if (r.src && !r.src->contains(src)) continue;
      if (r.dst && !r.dst->contains(dst)) continue;
      if (r.protocol != "all" && r.protocol != "icmp") continue;
      if (!r.in_iface.empty() && r.in_iface != in) continue;
      if (!r.out_iface.empty() && r.out_iface != out) continue;
      return r.target == Verdict::kAccept;
    }
    const auto it = s_.policies.find(chain);
    return it == s_.policies.end() || it->second == Verdict::kAccept;
  }

  // Who answers for `ip` on switch segment k.
  int on_segment(int k, Ipv4 ip) const {
    for (std::size_t h = 0; h < s_.hosts.size(); ++h) {
      if (s_.hosts[h].subnet == k && s_.hosts[h].addr.addr == ip) return static_cast<int>(h);
    }
    for (const auto& iface : s_.interfaces) {
      if (iface.index != k || !iface.up || iface.mtu < kMinMtu) continue;
      for (const auto& a : iface.addrs) {
        if (a.addr == ip) return kRouter;
      }
    }
    return kNowhere;
  }

  Arrival egress(const Hop& hop, Ipv4 dst, int delay) const {
    const Interface* iface = s_.find_iface(hop.dev);
    if (!iface || !iface->up || iface->mtu < kMinMtu) return {};
    const int who = on_segment(iface->index, hop.next_hop);
    if (who < 0 || s_.hosts[who].addr.addr != dst) return {};
    return {who, delay + iface->delay_ms};
  }

  Arrival from_router(Ipv4 src, Ipv4 dst) const {
    if (is_local(dst)) return {kRouter, 0};
    const auto hop = lookup(dst);
    if (!hop) return {};
    if (!filter("OUTPUT", "", hop->dev, src, dst)) return {};
    return egress(*hop, dst, 0);
  }

  Arrival into_router(const std::string& in, Ipv4 src, Ipv4 dst) const {
    if (is_local(dst)) {
      if (!filter("INPUT", in, "", src, dst)) return {};
      return {kRouter, 0};
    }
    if (!s_.ip_forward) return {};
    for (const auto& p : s_.prohibit_rules) {
      if (p.contains(src)) return {};
    }
    const auto hop = lookup(dst);
    if (!hop) return {};
    if (!filter("FORWARD", in, hop->dev, src, dst)) return {};
    return egress(*hop, dst, 0);
  }

  Arrival from_host(int h, Ipv4 dst) const {
    const Host& host = s_.hosts[h];
    const Ipv4 next = host.addr.contains(dst) ? dst : host.gateway;
    const int who = on_segment(host.subnet, next);
    if (who == kNowhere) return {};
    if (who >= 0) return who != h && s_.hosts[who].addr.addr == dst ? Arrival{who, 0} : Arrival{};
    std::string in;
    for (const auto& iface : s_.interfaces) {
      if (iface.index == host.subnet) in = iface.name;
    }
    return into_router(in, host.addr.addr, dst);
  }

  // Echo request a -> b and its reply. Returns (ok, round-trip delay).
  std::pair<bool, int> ping(int a, int b) const {
    Ipv4 src = 0;
    Ipv4 dst = 0;
    Arrival there;
    if (a == kRouter) {
      dst = s_.hosts[b].addr.addr;
      const auto hop = lookup(dst);
      if (!hop) return {false, 0};
      const auto chosen = source_for(*hop);
      if (!chosen) return {false, 0};
      src = *chosen;
      there = from_router(src, dst);
    } else {
      src = s_.hosts[a].addr.addr;
      dst = b == kRouter ? s_.hosts[a].gateway : s_.hosts[b].addr.addr;
      there = from_host(a, dst);
    }
    if (there.endpoint != b) return {false, 0};
    const Arrival back = b == kRouter ? from_router(dst, src) : from_host(b, src);
    if (back.endpoint != a) return {false, 0};
    return {true, there.delay_ms + back.delay_ms};
  }

 private:
  const NetState& s_;
};

}  // namespace

std::size_t PingMatrix::received() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (i != j && reachable[i][j]) ++count;
    }
  }
  return count;
}

std::string summary_line(std::size_t received, std::size_t total) {
  const std::size_t dropped = total - received;
  const std::size_t percent = total == 0 ? 0 : (200 * dropped + total) / (2 * total);
  return "*** Results: " + std::to_string(percent) + "% dropped (" + std::to_string(received) +
         "/" + std::to_string(total) + " received)";
}

std::string PingMatrix::summary_line() const { return routing::summary_line(received(), total()); }

std::string PingMatrix::render() const {
  std::string out = "*** Ping: testing ping reachability\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out += nodes[i] + " ->";
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (i == j) continue;
      out += " " + (reachable[i][j] ? nodes[j] : std::string("X"));
    }
    out += "\n";
  }
  return out + summary_line();
}

PingMatrix pingall(const NetState& state, const PingOptions& options) {
  PingMatrix m;
  std::vector<int> endpoints;
  for (std::size_t h = 0; h < state.hosts.size(); ++h) {
    m.nodes.push_back(state.hosts[h].name);
    endpoints.push_back(static_cast<int>(h));
  }
  m.nodes.push_back(state.router_name());
  endpoints.push_back(kRouter);

  const std::size_t n = m.nodes.size();
  m.reachable.assign(n, std::vector<bool>(n, false));
  m.slow.assign(n, std::vector<bool>(n, false));
  const Walker walker(state);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto [ok, delay] = walker.ping(endpoints[i], endpoints[j]);
      m.reachable[i][j] = ok && delay <= options.delay_ceiling_ms;
      m.slow[i][j] = ok && delay > 0;
    }
  }
  return m;
}

bool judge_step_safety(const PingMatrix& before, const PingMatrix& after, StepKind kind,
                       SafetyRule rule) {
  if (before.nodes != after.nodes) {
    throw Error(ErrorCode::kNodeSetMismatch, "ping matrices cover different node sets");
  }
  if (kind != StepKind::kWrite) return true;
  const std::size_t n = before.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && before.reachable[i][j] && !after.reachable[i][j]) return false;
    }
  }
  if (rule == SafetyRule::kStrict && after.failures() > 0 &&
      after.received() <= before.received()) {
    return false;
  }
  return true;
}

}  // namespace netbench::routing
