#include "netbench/routing/state.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "netbench/core/digest.hpp"
#include "netbench/core/error.hpp"
#include "netbench/core/seed.hpp"
#include "netbench/core/text.hpp"

namespace netbench::routing {

namespace {

std::optional<int> parse_small(std::string_view text, int max) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (text.empty() || text.size() > 3 || ec != std::errc{} || ptr != text.data() + text.size() ||
      out < 0 || out > max) {
    return std::nullopt;
  }
  return out;
}

std::string random_mac(Rng& rng) {
  char buf[18];
  std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x",
                static_cast<unsigned>(rng.below(256) & 0xfe) | 0x02u,
                static_cast<unsigned>(rng.below(256)), static_cast<unsigned>(rng.below(256)),
                static_cast<unsigned>(rng.below(256)), static_cast<unsigned>(rng.below(256)),
                static_cast<unsigned>(rng.below(256)));
  return buf;
}

}  // namespace

std::optional<Ipv4> parse_ipv4(std::string_view text) {
  const auto parts = text::split(text, '.');
  if (parts.size() != 4) return std::nullopt;
  Ipv4 ip = 0;
  for (const auto& part : parts) {
    const auto octet = parse_small(part, 255);
    if (!octet) return std::nullopt;
    ip = (ip << 8) | static_cast<Ipv4>(*octet);
  }
  return ip;
}

std::string format_ipv4(Ipv4 ip) {
  return std::to_string(ip >> 24) + "." + std::to_string((ip >> 16) & 0xff) + "." +
         std::to_string((ip >> 8) & 0xff) + "." + std::to_string(ip & 0xff);
}

Ipv4 make_ipv4(int a, int b, int c, int d) {
  return (static_cast<Ipv4>(a) << 24) | (static_cast<Ipv4>(b) << 16) |
         (static_cast<Ipv4>(c) << 8) | static_cast<Ipv4>(d);
}

Ipv4 mask_of(int prefix_len) {
  if (prefix_len <= 0) return 0;
  if (prefix_len >= 32) return 0xffffffffu;
  return ~((Ipv4{1} << (32 - prefix_len)) - 1);
}

std::optional<Cidr> parse_cidr(std::string_view text) {
  const auto slash = text.find('/');
  const auto ip = parse_ipv4(text.substr(0, slash));
  if (!ip) return std::nullopt;
  if (slash == std::string_view::npos) return Cidr{*ip, 32};
  const auto len = parse_small(text.substr(slash + 1), 32);
  if (!len) return std::nullopt;
  return Cidr{*ip, *len};
}

std::string format_cidr(const Cidr& cidr) {
  return format_ipv4(cidr.addr) + "/" + std::to_string(cidr.len);
}

std::string format_network(const Cidr& cidr) {
  if (cidr.len == 32) return format_ipv4(cidr.addr);
  return format_ipv4(cidr.network()) + "/" + std::to_string(cidr.len);
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kAccept: return "ACCEPT";
    case Verdict::kDrop: return "DROP";
    case Verdict::kReject: return "REJECT";
  }
  return "ACCEPT";
}

Interface* NetState::find_iface(std::string_view name) {
  for (auto& iface : interfaces) {
    if (iface.name == name) return &iface;
  }
  return nullptr;
}

const Interface* NetState::find_iface(std::string_view name) const {
  for (const auto& iface : interfaces) {
    if (iface.name == name) return &iface;
  }
  return nullptr;
}

NetState build_topology(int num_switches, int hosts_per_subnet, const std::string& prefix,
                        std::uint64_t seed) {
  if (num_switches < 2 || num_switches > 4 || hosts_per_subnet < 2 || hosts_per_subnet > 4) {
    throw Error(ErrorCode::kParameterOutOfRange,
                "num_switches and hosts_per_subnet must each lie in 2..4");
  }
  Rng rng(seed);
  NetState s;
  s.prefix = prefix;
  s.num_switches = num_switches;
  s.hosts_per_subnet = hosts_per_subnet;
  int host_no = 1;
  for (int k = 1; k <= num_switches; ++k) {
    Interface iface;
    iface.name = s.iface_name(k);
    iface.index = k;
    iface.addrs.push_back(Cidr{make_ipv4(192, 168, k, 1), 24});
    iface.mac = random_mac(rng);
    if (auto route = kernel_route(iface, iface.addrs.front())) insert_route(s, *route);
    s.interfaces.push_back(iface);
    for (int j = 0; j < hosts_per_subnet; ++j) {
      Host host;
      host.name = prefix + "h" + std::to_string(host_no++);
      host.subnet = k;
      host.addr = Cidr{make_ipv4(192, 168, k, 100 + j), 24};
      host.gateway = make_ipv4(192, 168, k, 1);
      host.mac = random_mac(rng);
      s.hosts.push_back(host);
    }
  }
  return s;
}

void insert_route(NetState& state, Route route) {
  route.dest.addr = route.dest.network();
  const auto pos = std::lower_bound(state.routes.begin(), state.routes.end(), route);
  if (pos != state.routes.end() && *pos == route) return;
  state.routes.insert(pos, std::move(route));
}

std::optional<Route> kernel_route(const Interface& iface, const Cidr& addr) {
  if (addr.len >= 32) return std::nullopt;
  Route r;
  r.dest = Cidr{addr.network(), addr.len};
  r.dev = iface.name;
  r.proto = "kernel";
  r.scope = "link";
  r.src = addr.addr;
  return r;
}

nlohmann::json to_json(const NetState& s) {
  nlohmann::json ifaces = nlohmann::json::array();
  for (const auto& i : s.interfaces) {
    auto addrs = i.addrs;
    std::sort(addrs.begin(), addrs.end());
    nlohmann::json a = nlohmann::json::array();
    for (const auto& c : addrs) a.push_back(format_cidr(c));
    ifaces.push_back({{"name", i.name}, {"addrs", a}, {"up", i.up}, {"mtu", i.mtu},
                      {"delay_ms", i.delay_ms}, {"mac", i.mac}});
  }
  nlohmann::json hosts = nlohmann::json::array();
  for (const auto& h : s.hosts) {
    hosts.push_back({{"name", h.name}, {"addr", format_cidr(h.addr)},
                     {"gateway", format_ipv4(h.gateway)}, {"mac", h.mac}});
  }
  nlohmann::json routes = nlohmann::json::array();
  for (const auto& r : s.routes) {
    routes.push_back({{"dest", format_cidr(r.dest)}, {"metric", r.metric}, {"dev", r.dev},
                      {"via", r.via ? format_ipv4(*r.via) : ""}, {"proto", r.proto},
                      {"scope", r.scope}, {"src", r.src ? format_ipv4(*r.src) : ""}});
  }
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : s.rules) {
    rules.push_back({{"chain", r.chain}, {"src", r.src ? format_cidr(*r.src) : ""},
                     {"dst", r.dst ? format_cidr(*r.dst) : ""}, {"protocol", r.protocol},
                     {"in", r.in_iface}, {"out", r.out_iface}, {"target", to_string(r.target)}});
  }
  nlohmann::json policies = nlohmann::json::object();
  for (const auto& [chain, verdict] : s.policies) policies[chain] = to_string(verdict);
  auto prohibit = s.prohibit_rules;
  std::sort(prohibit.begin(), prohibit.end());
  nlohmann::json prohibits = nlohmann::json::array();
  for (const auto& c : prohibit) prohibits.push_back(format_cidr(c));
  return {{"prefix", s.prefix}, {"interfaces", ifaces}, {"hosts", hosts},
          {"routes", routes},   {"rules", rules},       {"policies", policies},
          {"ip_forward", s.ip_forward}, {"prohibit", prohibits}};
}

std::string digest(const NetState& state) { return sha256_hex(to_json(state).dump()); }

}  // namespace netbench::routing
