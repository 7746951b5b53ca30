#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace netbench::routing {

using Ipv4 = std::uint32_t;

/// Dotted quad; nullopt on anything else.
std::optional<Ipv4> parse_ipv4(std::string_view text);
std::string format_ipv4(Ipv4 ip);
Ipv4 make_ipv4(int a, int b, int c, int d);
Ipv4 mask_of(int prefix_len);

struct Cidr {
  Ipv4 addr = 0;
  int len = 32;
  Ipv4 network() const { return addr & mask_of(len); }
  bool contains(Ipv4 ip) const { return (ip & mask_of(len)) == network(); }
  friend auto operator<=>(const Cidr&, const Cidr&) = default;
};

/// "a.b.c.d/n", or a bare address as /32. `strict` rejects host bits.
std::optional<Cidr> parse_cidr(std::string_view text);
std::string format_cidr(const Cidr& cidr);
/// Network form, e.g. 192.168.1.0/24.
std::string format_network(const Cidr& cidr);

struct Interface {
  std::string name;
  int index = 0;  // K in r0-ethK; also the attached subnet/switch number
  std::vector<Cidr> addrs;
  bool up = true;
  int mtu = 1500;
  int delay_ms = 0;
  std::string mac;
  friend bool operator==(const Interface&, const Interface&) = default;
};

struct Host {
  std::string name;
  int subnet = 0;
  Cidr addr;
  Ipv4 gateway = 0;
  std::string mac;
  std::string iface() const { return name + "-eth0"; }
  friend bool operator==(const Host&, const Host&) = default;
};

struct Route {
  Cidr dest;  // stored in network form
  int metric = 0;
  std::string dev;  // empty: resolved through the gateway
  std::optional<Ipv4> via;
  std::string proto = "boot";
  std::string scope;  // "link" or empty
  std::optional<Ipv4> src;
  friend auto operator<=>(const Route&, const Route&) = default;
};

enum class Verdict { kAccept, kDrop, kReject };
std::string_view to_string(Verdict verdict);

struct FilterRule {
  std::string chain;
  std::optional<Cidr> src;
  std::optional<Cidr> dst;
  std::string protocol = "all";
  std::string in_iface;
  std::string out_iface;
  Verdict target = Verdict::kDrop;
  friend bool operator==(const FilterRule&, const FilterRule&) = default;
};

/// Router r0 with one interface per subnet, hosts attached to per-subnet
/// switches, and the router's kernel configuration.
struct NetState {
  std::string prefix;
  int num_switches = 2;
  int hosts_per_subnet = 2;
  std::vector<Interface> interfaces;
  std::vector<Host> hosts;
  std::vector<Route> routes;  // kept sorted
  std::vector<FilterRule> rules;
  std::map<std::string, Verdict> policies{
      {"INPUT", Verdict::kAccept}, {"FORWARD", Verdict::kAccept}, {"OUTPUT", Verdict::kAccept}};
  bool ip_forward = true;
  std::vector<Cidr> prohibit_rules;

  std::string router_name() const { return prefix + "r0"; }
  std::string iface_name(int k) const { return prefix + "r0-eth" + std::to_string(k); }
  Interface* find_iface(std::string_view name);
  const Interface* find_iface(std::string_view name) const;
  friend bool operator==(const NetState&, const NetState&) = default;
};

/// Subnets 192.168.K.0/24 behind r0-ethK (address .1), hosts numbered
/// consecutively from h1 at .100 upward in each subnet. Throws
/// kParameterOutOfRange unless both counts lie in 2..4. `seed` only picks MAC
/// addresses.
NetState build_topology(int num_switches, int hosts_per_subnet, const std::string& prefix,
                        std::uint64_t seed);

/// Insert keeping the route table sorted.
void insert_route(NetState& state, Route route);
/// The kernel route an address produces (none for /32).
std::optional<Route> kernel_route(const Interface& iface, const Cidr& addr);

nlohmann::json to_json(const NetState& state);
std::string digest(const NetState& state);

}  // namespace netbench::routing
