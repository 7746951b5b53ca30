#include "netbench/routing/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <optional>
#include <vector>

#include "netbench/core/text.hpp"

namespace netbench::routing {

namespace {

struct CmdError {
  std::string message;
};

[[noreturn]] void fail(std::string message) { throw CmdError{std::move(message)}; }

std::optional<long> to_long(std::string_view text) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return out;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

bool is_prefix_of(std::string_view word, std::string_view full, std::size_t min_len) {
  return word.size() >= min_len && word.size() <= full.size() && full.substr(0, word.size()) == word;
}

std::string format_delay(int ms) { return std::to_string(ms) + "ms"; }

std::string netmask_text(int len) { return format_ipv4(mask_of(len)); }

std::string broadcast_of(const Cidr& c) { return format_ipv4(c.network() | ~mask_of(c.len)); }

class Shell {
 public:
  Shell(NetState& state, const Host* host, std::vector<std::string> words)
      : s_(state), host_(host), w_(std::move(words)) {}

  CommandResult run() {
    const std::string& cmd = w_[0];
    if (cmd == "ifconfig") return ifconfig();
    if (cmd == "ip") return ip();
    if (cmd == "route" && w_.size() == 2 && w_[1] == "-n") return read(route_n());
    if (cmd == "iptables") return iptables();
    if (cmd == "sysctl") return sysctl();
    if (cmd == "cat" && w_.size() == 2 && w_[1] == "/proc/sys/net/ipv4/ip_forward") {
      return read(host_ ? "0" : (s_.ip_forward ? "1" : "0"));
    }
    if (cmd == "tc") return tc();
    fail(cmd + ": command not supported in this environment");
  }

 private:
  NetState& s_;
  const Host* host_;
  std::vector<std::string> w_;

  CommandResult read(std::string out) { return {StepKind::kRead, std::move(out)}; }
  CommandResult write(std::string out = "") {
    if (host_) fail(host_->name + " is read-only here; configure the router instead");
    return {StepKind::kWrite, std::move(out)};
  }

  // Accepts the full name, the name without prefix, or "ethK".
  Interface& iface(const std::string& name) {
    if (host_) fail("Cannot find device \"" + name + "\"");
    if (Interface* i = s_.find_iface(name)) return *i;
    if (Interface* i = s_.find_iface(s_.prefix + name)) return *i;
    if (Interface* i = s_.find_iface(s_.prefix + "r0-" + name)) return *i;
    fail("Cannot find device \"" + name + "\"");
  }
  std::string iface_name(const std::string& name) { return iface(name).name; }

  std::string need(std::size_t i, const std::string& what) {
    if (i >= w_.size()) fail("Command line is not complete. Missing " + what + ".");
    return w_[i];
  }

  Cidr cidr_arg(const std::string& text) {
    if (text == "default") return Cidr{0, 0};
    const auto c = parse_cidr(text);
    if (!c) fail("Error: inet prefix is expected rather than \"" + text + "\".");
    return *c;
  }
  Ipv4 ip_arg(const std::string& text) {
    const auto ip = parse_ipv4(text);
    if (!ip) fail("Error: inet address is expected rather than \"" + text + "\".");
    return *ip;
  }

  // ---- link state --------------------------------------------------------

  void set_link(Interface& i, bool up) {
    if (i.up == up) return;
    i.up = up;
    if (!up) {
      std::erase_if(s_.routes, [&](const Route& r) { return r.dev == i.name && r.proto == "kernel"; });
    } else {
      for (const auto& a : i.addrs) {
        if (auto r = kernel_route(i, a)) insert_route(s_, *r);
      }
    }
  }

  void set_mtu(Interface& i, const std::string& text) {
    const auto mtu = to_long(text);
    if (!mtu || *mtu < 68 || *mtu > 65535) fail("Error: mtu less than device minimum.");
    i.mtu = static_cast<int>(*mtu);
  }

  void add_addr(Interface& i, const Cidr& c) {
    if (std::find(i.addrs.begin(), i.addrs.end(), c) != i.addrs.end()) {
      fail("RTNETLINK answers: File exists");
    }
    i.addrs.push_back(c);
    if (i.up) {
      if (auto r = kernel_route(i, c)) insert_route(s_, *r);
    }
  }

  void drop_kernel_route(const Interface& i, const Cidr& c) {
    std::erase_if(s_.routes, [&](const Route& r) {
      return r.proto == "kernel" && r.dev == i.name && r.src == c.addr &&
             r.dest == Cidr{c.network(), c.len};
    });
  }

  void del_addr(Interface& i, const std::string& text) {
    const Cidr c = cidr_arg(text);
    const bool has_len = text.find('/') != std::string::npos;
    auto it = std::find_if(i.addrs.begin(), i.addrs.end(), [&](const Cidr& a) {
      return a.addr == c.addr && (!has_len || a.len == c.len);
    });
    if (it == i.addrs.end()) fail("RTNETLINK answers: Cannot assign requested address");
    const Cidr gone = *it;
    i.addrs.erase(it);
    drop_kernel_route(i, gone);
  }

  void flush_addrs(Interface& i) {
    for (const auto& a : i.addrs) drop_kernel_route(i, a);
    i.addrs.clear();
  }

  // ---- ifconfig ----------------------------------------------------------

  std::string ifconfig_block(const std::string& name, bool up, int mtu, const std::vector<Cidr>& addrs,
                             const std::string& mac) {
    std::string out = name + ": flags=" +
                      (up ? std::string("4163<UP,BROADCAST,RUNNING,MULTICAST>")
                          : std::string("4098<BROADCAST,MULTICAST>")) +
                      "  mtu " + std::to_string(mtu) + "\n";
    if (!addrs.empty()) {
      const Cidr& a = addrs.front();
      out += "        inet " + format_ipv4(a.addr) + "  netmask " + netmask_text(a.len);
      if (a.len < 31) out += "  broadcast " + broadcast_of(a);
      out += "\n";
    }
    out += "        ether " + mac + "  txqueuelen 1000  (Ethernet)\n";
    return out;
  }

  CommandResult ifconfig() {
    if (host_) {
      if (w_.size() > 2 || (w_.size() == 2 && w_[1] != "-a" && w_[1] != host_->iface())) {
        fail("ifconfig on a host only shows " + host_->iface());
      }
      return read(ifconfig_block(host_->iface(), true, 1500, {host_->addr}, host_->mac));
    }
    if (w_.size() == 1 || (w_.size() == 2 && w_[1] == "-a")) {
      std::string out;
      for (const auto& i : s_.interfaces) {
        if (!i.up && w_.size() == 1) continue;
        if (!out.empty()) out += "\n";
        out += ifconfig_block(i.name, i.up, i.mtu, i.addrs, i.mac);
      }
      return read(out);
    }
    Interface& i = iface(w_[1]);
    if (w_.size() == 2) return read(ifconfig_block(i.name, i.up, i.mtu, i.addrs, i.mac));

    std::size_t k = 2;
    if (auto addr = parse_cidr(w_[k]); addr && w_[k] != "up" && w_[k] != "down") {
      Cidr c = *addr;
      if (w_[k].find('/') == std::string::npos) c.len = 24;
      ++k;
      if (k < w_.size() && w_[k] == "netmask") {
        const auto mask = parse_ipv4(need(k + 1, "netmask"));
        if (!mask) fail("SIOCSIFNETMASK: Invalid argument");
        int len = 0;
        while (len < 32 && (*mask & (Ipv4{1} << (31 - len)))) ++len;
        if (mask_of(len) != *mask) fail("SIOCSIFNETMASK: Invalid argument");
        c.len = len;
        k += 2;
      }
      flush_addrs(i);
      add_addr(i, c);
    }
    for (; k < w_.size(); ++k) {
      if (w_[k] == "up") {
        set_link(i, true);
      } else if (w_[k] == "down") {
        set_link(i, false);
      } else if (w_[k] == "mtu") {
        set_mtu(i, need(k + 1, "mtu value"));
        ++k;
      } else {
        fail(w_[k] + ": Unknown host");
      }
    }
    return write();
  }

  // ---- ip ----------------------------------------------------------------

  CommandResult ip() {
    std::size_t k = 1;
    while (k < w_.size() && (w_[k] == "-4" || w_[k] == "-d")) ++k;
    const std::string obj = need(k, "object");
    if (is_prefix_of(obj, "address", 1)) return ip_addr(k + 1);
    if (is_prefix_of(obj, "link", 1)) return ip_link(k + 1);
    if (is_prefix_of(obj, "route", 1) && obj != "rule" && !is_prefix_of(obj, "rule", 2)) {
      return ip_route(k + 1);
    }
    if (is_prefix_of(obj, "rule", 2)) return ip_rule(k + 1);
    fail("Object \"" + obj + "\" is unknown, try \"ip help\".");
  }

  std::string addr_show_block(int index, const std::string& name, bool up, int mtu, int delay,
                              const std::vector<Cidr>& addrs, const std::string& mac, bool link_only) {
    std::string flags = up ? "<BROADCAST,MULTICAST,UP,LOWER_UP>" : "<BROADCAST,MULTICAST>";
    std::string out = std::to_string(index) + ": " + name + ": " + flags + " mtu " + std::to_string(mtu) +
                      " qdisc " + (delay > 0 ? "netem" : "noqueue") + " state " + (up ? "UP" : "DOWN") +
                      (link_only ? " mode DEFAULT" : "") + " group default qlen 1000\n";
    out += "    link/ether " + mac + " brd ff:ff:ff:ff:ff:ff\n";
    if (link_only) return out;
    for (const auto& a : addrs) {
      out += "    inet " + format_cidr(a);
      if (a.len < 31) out += " brd " + broadcast_of(a);
      out += " scope global " + name + "\n       valid_lft forever preferred_lft forever\n";
    }
    return out;
  }

  std::string show_ifaces(std::size_t k, bool link_only) {
    std::string only;
    for (; k < w_.size(); ++k) {
      if (w_[k] == "show" || w_[k] == "list" || w_[k] == "ls" || w_[k] == "dev") continue;
      if (!only.empty()) fail("Error: either \"dev\" is duplicate, or \"" + w_[k] + "\" is a garbage.");
      only = w_[k];
    }
    if (host_) {
      if (!only.empty() && only != host_->iface()) fail("Device \"" + only + "\" does not exist.");
      return addr_show_block(2, host_->iface(), true, 1500, 0, {host_->addr}, host_->mac, link_only);
    }
    const std::string target = only.empty() ? "" : iface_name(only);
    std::string out;
    for (const auto& i : s_.interfaces) {
      if (!target.empty() && i.name != target) continue;
      out += addr_show_block(i.index + 1, i.name, i.up, i.mtu, i.delay_ms, i.addrs, i.mac, link_only);
    }
    return out;
  }

  std::string dev_arg(std::size_t k) {
    for (std::size_t j = k; j < w_.size(); ++j) {
      if (w_[j] == "dev") return need(j + 1, "device");
    }
    fail("Not enough information: \"dev\" argument is required.");
  }

  CommandResult ip_addr(std::size_t k) {
    if (k >= w_.size() || w_[k] == "show" || w_[k] == "list" || w_[k] == "ls" || w_[k] == "dev") {
      return read(show_ifaces(k, false));
    }
    const std::string verb = w_[k];
    if (verb == "add" || verb == "del" || verb == "delete") {
      if (host_) write();
      const std::string addr = need(k + 1, "address");
      std::size_t j = k + 2;
      std::string dev;
      for (; j < w_.size(); ++j) {
        if (w_[j] == "dev") {
          dev = need(++j, "device");
        } else if (w_[j] == "brd" || w_[j] == "broadcast") {
          need(++j, "broadcast");
        } else {
          fail("Error: either \"local\" is duplicate, or \"" + w_[j] + "\" is a garbage.");
        }
      }
      if (dev.empty()) fail("Not enough information: \"dev\" argument is required.");
      Interface& i = iface(dev);
      if (verb == "add") {
        Cidr c = cidr_arg(addr);
        add_addr(i, c);
      } else {
        del_addr(i, addr);
      }
      return write();
    }
    if (verb == "flush") {
      if (host_) write();
      flush_addrs(iface(dev_arg(k + 1)));
      return write();
    }
    fail("Command \"" + verb + "\" is unknown, try \"ip address help\".");
  }

  CommandResult ip_link(std::size_t k) {
    if (k >= w_.size() || w_[k] == "show" || w_[k] == "list" || w_[k] == "ls") {
      return read(show_ifaces(k, true));
    }
    if (w_[k] != "set") fail("Command \"" + w_[k] + "\" is unknown, try \"ip link help\".");
    if (host_) write();
    std::size_t j = k + 1;
    if (j < w_.size() && w_[j] == "dev") ++j;
    Interface& i = iface(need(j, "device"));
    if (++j >= w_.size()) fail("Not enough of information: nothing to set.");
    for (; j < w_.size(); ++j) {
      if (w_[j] == "up") {
        set_link(i, true);
      } else if (w_[j] == "down") {
        set_link(i, false);
      } else if (w_[j] == "mtu") {
        set_mtu(i, need(j + 1, "mtu"));
        ++j;
      } else {
        fail("Error: argument \"" + w_[j] + "\" is wrong: unknown link attribute");
      }
    }
    return write();
  }

  std::string route_line(const Route& r) {
    std::string out = r.dest.len == 0 ? "default" : format_network(r.dest);
    if (r.via) out += " via " + format_ipv4(*r.via);
    if (!r.dev.empty()) out += " dev " + r.dev;
    if (r.proto != "boot") out += " proto " + r.proto;
    if (!r.scope.empty()) out += " scope " + r.scope;
    if (r.src) out += " src " + format_ipv4(*r.src);
    if (r.metric != 0) out += " metric " + std::to_string(r.metric);
    if (!r.dev.empty()) {
      const Interface* i = s_.find_iface(r.dev);
      if (i && !i->up) out += " linkdown";
    }
    return out;
  }

  std::string route_n() {
    std::string out =
        "Kernel IP routing table\n"
        "Destination     Gateway         Genmask         Flags Metric Ref    Use Iface\n";
    if (host_) {
      out += pad("0.0.0.0", 16) + pad(format_ipv4(host_->gateway), 16) + pad("0.0.0.0", 16) +
             pad("UG", 6) + pad("0", 7) + pad("0", 7) + pad("0", 4) + host_->iface() + "\n";
      out += pad(format_ipv4(host_->addr.network()), 16) + pad("0.0.0.0", 16) +
             pad(netmask_text(host_->addr.len), 16) + pad("U", 6) + pad("0", 7) + pad("0", 7) +
             pad("0", 4) + host_->iface() + "\n";
      return out;
    }
    for (const auto& r : s_.routes) {
      out += pad(format_ipv4(r.dest.network()), 16) + pad(r.via ? format_ipv4(*r.via) : "0.0.0.0", 16) +
             pad(netmask_text(r.dest.len), 16) + pad(r.via ? "UG" : "U", 6) +
             pad(std::to_string(r.metric), 7) + pad("0", 7) + pad("0", 4) + r.dev + "\n";
    }
    return out;
  }

  Route parse_route_spec(std::size_t k, bool& metric_given, bool for_delete) {
    Route r;
    r.dest = cidr_arg(need(k, "destination"));
    r.dest.addr = r.dest.network();
    for (std::size_t j = k + 1; j < w_.size(); ++j) {
      const std::string& key = w_[j];
      if (key == "via") {
        r.via = ip_arg(need(++j, "gateway"));
      } else if (key == "dev" || key == "oif") {
        r.dev = iface_name(need(++j, "device"));
      } else if (key == "metric" || key == "priority" || key == "preference") {
        const auto m = to_long(need(++j, "metric"));
        if (!m || *m < 0 || *m > 0xffffffffL) fail("Error: \"metric\" value is invalid");
        r.metric = static_cast<int>(*m);
        metric_given = true;
      } else if (key == "proto" || key == "protocol") {
        const std::string p = need(++j, "protocol");
        if (p != "kernel" && p != "static" && p != "boot") fail("Error: \"protocol\" value is invalid");
        r.proto = p;
      } else if (key == "scope") {
        const std::string sc = need(++j, "scope");
        if (sc != "link" && sc != "global" && sc != "host") fail("Error: invalid \"scope\" value.");
        r.scope = sc == "global" ? "" : sc;
      } else if (key == "src") {
        r.src = ip_arg(need(++j, "source"));
      } else {
        fail("Error: either \"to\" is duplicate, or \"" + key + "\" is a garbage.");
      }
    }
    if (!for_delete) {
      if (r.dev.empty() && !r.via) fail("Error: Device for nexthop is not up.");
      if (!r.via && r.scope.empty() && std::find(w_.begin(), w_.end(), "scope") == w_.end()) {
        r.scope = "link";
      }
      if (r.src) {
        bool local = false;
        for (const auto& i : s_.interfaces) {
          for (const auto& a : i.addrs) local = local || a.addr == *r.src;
        }
        if (!local) fail("Error: Invalid prefsrc address.");
      }
      if (r.dev.empty() && r.via) {
        bool reachable = false;
        for (const auto& existing : s_.routes) reachable = reachable || existing.dest.contains(*r.via);
        if (!reachable) fail("Error: Nexthop has invalid gateway.");
      }
    }
    return r;
  }

  CommandResult ip_route(std::size_t k) {
    if (k >= w_.size() || w_[k] == "show" || w_[k] == "list" || w_[k] == "ls") {
      if (k + 1 < w_.size() && k < w_.size()) fail("Error: route filters are not supported here.");
      if (host_) {
        return read("default via " + format_ipv4(host_->gateway) + " dev " + host_->iface() + " \n" +
                    format_network(host_->addr) + " dev " + host_->iface() +
                    " proto kernel scope link src " + format_ipv4(host_->addr.addr) + " \n");
      }
      std::string out;
      for (const auto& r : s_.routes) out += route_line(r) + " \n";
      return read(out);
    }
    const std::string verb = w_[k];
    if (verb == "get") {
      const Ipv4 dst = ip_arg(need(k + 1, "address"));
      if (host_) {
        const bool local = host_->addr.contains(dst);
        return read(format_ipv4(dst) + (local ? "" : " via " + format_ipv4(host_->gateway)) + " dev " +
                    host_->iface() + " src " + format_ipv4(host_->addr.addr) + " uid 0 \n    cache \n");
      }
      return read(route_get(dst));
    }
    if (verb != "add" && verb != "del" && verb != "delete" && verb != "replace" && verb != "change") {
      fail("Command \"" + verb + "\" is unknown, try \"ip route help\".");
    }
    if (host_) write();
    bool metric_given = false;
    const bool is_delete = verb == "del" || verb == "delete";
    Route r = parse_route_spec(k + 1, metric_given, is_delete);
    if (is_delete) {
      const bool dev_given = !r.dev.empty();
      const auto before = s_.routes.size();
      std::erase_if(s_.routes, [&](const Route& x) {
        return x.dest == r.dest && (!metric_given || x.metric == r.metric) &&
               (!dev_given || x.dev == r.dev) && (!r.via || x.via == r.via) &&
               (!r.src || x.src == r.src);
      });
      if (s_.routes.size() == before) fail("RTNETLINK answers: No such process");
      return write();
    }
    const auto same_key = [&](const Route& x) { return x.dest == r.dest && x.metric == r.metric; };
    const bool exists = std::any_of(s_.routes.begin(), s_.routes.end(), same_key);
    if (verb == "add" && exists) fail("RTNETLINK answers: File exists");
    if (verb == "change" && !exists) fail("RTNETLINK answers: No such file or directory");
    std::erase_if(s_.routes, same_key);
    insert_route(s_, r);
    return write();
  }

  std::string route_get(Ipv4 dst) {
    for (const auto& i : s_.interfaces) {
      for (const auto& a : i.addrs) {
        if (a.addr == dst) return "local " + format_ipv4(dst) + " dev lo src " + format_ipv4(dst) +
                                  " uid 0 \n    cache <local> \n";
      }
    }
    const Route* best = nullptr;
    for (const auto& r : s_.routes) {
      if (!r.dest.contains(dst)) continue;
      if (!r.dev.empty()) {
        const Interface* i = s_.find_iface(r.dev);
        if (!i || !i->up) continue;
      }
      if (!best || r.dest.len > best->dest.len ||
          (r.dest.len == best->dest.len && r.metric < best->metric)) {
        best = &r;
      }
    }
    if (!best) return "RTNETLINK answers: Network is unreachable\n";
    std::string out = format_ipv4(dst);
    if (best->via) out += " via " + format_ipv4(*best->via);
    if (!best->dev.empty()) out += " dev " + best->dev;
    if (best->src) out += " src " + format_ipv4(*best->src);
    return out + " uid 0 \n    cache \n";
  }

  CommandResult ip_rule(std::size_t k) {
    if (k >= w_.size() || w_[k] == "show" || w_[k] == "list" || w_[k] == "ls") {
      if (host_) {
        return read("0:\tfrom all lookup local\n32766:\tfrom all lookup main\n32767:\tfrom all lookup default\n");
      }
      std::string out = "0:\tfrom all lookup local\n";
      for (std::size_t i = s_.prohibit_rules.size(); i-- > 0;) {
        const Cidr& c = s_.prohibit_rules[i];
        out += std::to_string(32765 - i) + ":\tfrom " + (c.len == 0 ? "all" : format_network(c)) +
               " prohibit\n";
      }
      return read(out + "32766:\tfrom all lookup main\n32767:\tfrom all lookup default\n");
    }
    const std::string verb = w_[k];
    if (verb != "add" && verb != "del" && verb != "delete") {
      fail("Command \"" + verb + "\" is unknown, try \"ip rule help\".");
    }
    if (host_) write();
    Cidr from{0, 0};
    bool prohibit = false;
    for (std::size_t j = k + 1; j < w_.size(); ++j) {
      if (w_[j] == "from") {
        const std::string v = need(++j, "selector");
        from = v == "all" ? Cidr{0, 0} : cidr_arg(v);
        from.addr = from.network();
      } else if (w_[j] == "prohibit") {
        prohibit = true;
      } else {
        fail("Error: only \"from <prefix|all> prohibit\" rules are supported here.");
      }
    }
    if (!prohibit) fail("Error: only \"from <prefix|all> prohibit\" rules are supported here.");
    if (verb == "add") {
      s_.prohibit_rules.push_back(from);
    } else {
      const auto it = std::find(s_.prohibit_rules.begin(), s_.prohibit_rules.end(), from);
      if (it == s_.prohibit_rules.end()) fail("RTNETLINK answers: No such file or directory");
      s_.prohibit_rules.erase(it);
    }
    return write();
  }

  // ---- iptables ----------------------------------------------------------

  static bool valid_chain(const std::string& c) {
    return c == "INPUT" || c == "FORWARD" || c == "OUTPUT";
  }

  std::string rule_spec_text(const FilterRule& r) {
    std::string out = "-A " + r.chain;
    if (r.src) out += " -s " + format_cidr(Cidr{r.src->network(), r.src->len});
    if (r.dst) out += " -d " + format_cidr(Cidr{r.dst->network(), r.dst->len});
    if (!r.in_iface.empty()) out += " -i " + r.in_iface;
    if (!r.out_iface.empty()) out += " -o " + r.out_iface;
    if (r.protocol != "all") out += " -p " + r.protocol;
    out += " -j " + std::string(to_string(r.target));
    if (r.target == Verdict::kReject) out += " --reject-with icmp-port-unreachable";
    return out;
  }

  std::string list_rules(const std::string& only, bool numeric, bool verbose, bool line_numbers) {
    std::string out;
    for (const std::string chain : {"INPUT", "FORWARD", "OUTPUT"}) {
      if (!only.empty() && chain != only) continue;
      if (!out.empty()) out += "\n";
      out += "Chain " + chain + " (policy " + std::string(to_string(s_.policies.at(chain))) +
             (verbose ? " 0 packets, 0 bytes)\n" : ")\n");
      if (line_numbers) out += "num  ";
      if (verbose) out += " pkts bytes ";
      out += "target     prot opt ";
      if (verbose) out += "in     out    ";
      out += "source               destination         \n";
      std::size_t num = 0;
      for (const auto& r : s_.rules) {
        if (r.chain != chain) continue;
        if (line_numbers) out += pad(std::to_string(++num), 5);
        if (verbose) out += "    0     0 ";
        out += pad(std::string(to_string(r.target)), 11) + pad(r.protocol, 5) + "--  ";
        if (verbose) out += pad(r.in_iface.empty() ? "*" : r.in_iface, 7) + pad(r.out_iface.empty() ? "*" : r.out_iface, 7);
        auto addr = [&](const std::optional<Cidr>& c) {
          if (!c) return std::string(numeric ? "0.0.0.0/0" : "anywhere");
          return format_network(Cidr{c->network(), c->len});
        };
        out += pad(addr(r.src), 21) + pad(addr(r.dst), 20);
        if (r.target == Verdict::kReject) out += " reject-with icmp-port-unreachable";
        out += "\n";
      }
    }
    return out;
  }

  FilterRule parse_rule(const std::string& chain, std::size_t k) {
    FilterRule r;
    r.chain = chain;
    bool have_target = false;
    for (std::size_t j = k; j < w_.size(); ++j) {
      const std::string& opt = w_[j];
      if (opt == "-s" || opt == "--source" || opt == "--src") {
        r.src = cidr_arg(need(++j, "source"));
      } else if (opt == "-d" || opt == "--destination" || opt == "--dst") {
        r.dst = cidr_arg(need(++j, "destination"));
      } else if (opt == "-p" || opt == "--protocol") {
        const std::string p = need(++j, "protocol");
        if (p != "all" && p != "icmp" && p != "tcp" && p != "udp") {
          fail("iptables v1.8.7 (legacy): unknown protocol \"" + p + "\" specified");
        }
        r.protocol = p;
      } else if (opt == "-i" || opt == "--in-interface") {
        r.in_iface = iface_name(need(++j, "interface"));
      } else if (opt == "-o" || opt == "--out-interface") {
        r.out_iface = iface_name(need(++j, "interface"));
      } else if (opt == "-j" || opt == "--jump") {
        const std::string t = need(++j, "target");
        if (t == "DROP") {
          r.target = Verdict::kDrop;
        } else if (t == "REJECT") {
          r.target = Verdict::kReject;
        } else if (t == "ACCEPT") {
          r.target = Verdict::kAccept;
        } else {
          fail("iptables v1.8.7 (legacy): Couldn't load target `" + t + "':No such file or directory");
        }
        have_target = true;
      } else if (opt == "--reject-with") {
        need(++j, "reject type");
      } else {
        fail("iptables v1.8.7 (legacy): unknown option \"" + opt + "\"");
      }
    }
    if (!have_target) fail("iptables: a -j target is required in this environment.");
    if (r.src) r.src->addr = r.src->network();
    if (r.dst) r.dst->addr = r.dst->network();
    return r;
  }

  CommandResult iptables() {
    std::size_t k = 1;
    if (k + 1 < w_.size() && w_[k] == "-t") {
      if (w_[k + 1] != "filter") fail("iptables: only the filter table is modelled here.");
      k += 2;
    }
    const std::string op = need(k, "command");
    // Read forms: -L / -S with -n, -v, --line-numbers in any combination.
    if (op.size() >= 2 && op[0] == '-' && op[1] != '-' &&
        (op.find('L') != std::string::npos || op.find('S') != std::string::npos)) {
      bool numeric = false;
      bool verbose = false;
      bool lines = false;
      bool spec = false;
      std::string chain;
      for (std::size_t j = k; j < w_.size(); ++j) {
        const std::string& t = w_[j];
        if (t == "--line-numbers") {
          lines = true;
        } else if (t.size() >= 2 && t[0] == '-' && t[1] != '-') {
          for (char c : t.substr(1)) {
            if (c == 'n') numeric = true;
            else if (c == 'v') verbose = true;
            else if (c == 'L') spec = false;
            else if (c == 'S') spec = true;
            else fail("iptables v1.8.7 (legacy): unknown option \"" + t + "\"");
          }
        } else if (chain.empty() && valid_chain(t)) {
          chain = t;
        } else {
          fail("iptables: No chain/target/match by that name.");
        }
      }
      if (host_) return read("");
      if (spec) {
        std::string out;
        for (const std::string c : {"INPUT", "FORWARD", "OUTPUT"}) {
          if (chain.empty() || chain == c) out += "-P " + c + " " + std::string(to_string(s_.policies.at(c))) + "\n";
        }
        for (const auto& r : s_.rules) {
          if (chain.empty() || r.chain == chain) out += rule_spec_text(r) + "\n";
        }
        return read(out);
      }
      return read(list_rules(chain, numeric, verbose, lines));
    }

    if (host_) write();
    if (op == "-F" || op == "--flush") {
      const std::string chain = k + 1 < w_.size() ? w_[k + 1] : "";
      if (!chain.empty() && !valid_chain(chain)) fail("iptables: No chain/target/match by that name.");
      std::erase_if(s_.rules, [&](const FilterRule& r) { return chain.empty() || r.chain == chain; });
      return write();
    }
    if (op == "-P" || op == "--policy") {
      const std::string chain = need(k + 1, "chain");
      const std::string target = need(k + 2, "policy");
      if (!valid_chain(chain)) fail("iptables: No chain/target/match by that name.");
      if (target == "ACCEPT") {
        s_.policies[chain] = Verdict::kAccept;
      } else if (target == "DROP") {
        s_.policies[chain] = Verdict::kDrop;
      } else {
        fail("iptables: Bad policy name.");
      }
      return write();
    }
    if (op == "-A" || op == "--append" || op == "-I" || op == "--insert" || op == "-D" ||
        op == "--delete") {
      const std::string chain = need(k + 1, "chain");
      if (!valid_chain(chain)) fail("iptables: No chain/target/match by that name.");
      std::size_t j = k + 2;
      if (op == "-D" || op == "--delete") {
        if (j < w_.size()) {
          if (const auto n = to_long(w_[j]); n && j + 1 == w_.size()) {
            long seen = 0;
            for (auto it = s_.rules.begin(); it != s_.rules.end(); ++it) {
              if (it->chain == chain && ++seen == *n) {
                s_.rules.erase(it);
                return write();
              }
            }
            fail("iptables: Index of deletion too big.");
          }
        }
        const FilterRule r = parse_rule(chain, j);
        const auto it = std::find(s_.rules.begin(), s_.rules.end(), r);
        if (it == s_.rules.end()) fail("iptables: Bad rule (does a matching rule exist in that chain?).");
        s_.rules.erase(it);
        return write();
      }
      if (op == "-A" || op == "--append") {
        s_.rules.push_back(parse_rule(chain, j));
        return write();
      }
      long position = 1;
      if (j < w_.size()) {
        if (const auto n = to_long(w_[j])) {
          position = *n;
          ++j;
        }
      }
      const FilterRule r = parse_rule(chain, j);
      long seen = 0;
      auto at = s_.rules.begin();
      for (; at != s_.rules.end(); ++at) {
        if (at->chain == chain && ++seen == position) break;
      }
      if (position < 1 || (at == s_.rules.end() && seen + 1 < position)) {
        fail("iptables: Index of insertion too big.");
      }
      s_.rules.insert(at, r);
      return write();
    }
    fail("iptables v1.8.7 (legacy): unknown option \"" + op + "\"");
  }

  // ---- sysctl / tc -------------------------------------------------------

  CommandResult sysctl() {
    const bool host_value = host_ != nullptr;
    auto value = [&] { return std::string(host_value ? "0" : (s_.ip_forward ? "1" : "0")); };
    if (w_.size() == 2 && w_[1] == "net.ipv4.ip_forward") {
      return read("net.ipv4.ip_forward = " + value());
    }
    if (w_.size() == 3 && w_[1] == "-n" && w_[2] == "net.ipv4.ip_forward") return read(value());
    if (w_.size() == 3 && w_[1] == "-w") {
      const std::string& kv = w_[2];
      if (kv == "net.ipv4.ip_forward=1" || kv == "net.ipv4.ip_forward=0") {
        if (host_) write();
        s_.ip_forward = kv.back() == '1';
        return write("net.ipv4.ip_forward = " + std::string(1, kv.back()));
      }
    }
    fail("sysctl: only net.ipv4.ip_forward is available in this environment");
  }

  int parse_delay(const std::string& text) {
    auto number = [&](std::string_view digits, long scale_num, long scale_den) {
      const auto v = to_long(digits);
      if (!v || *v < 0) fail("Illegal \"delay\"");
      return static_cast<int>(*v * scale_num / scale_den);
    };
    if (text.size() > 2 && text.ends_with("ms")) return number(std::string_view(text).substr(0, text.size() - 2), 1, 1);
    if (text.size() > 2 && text.ends_with("us")) return number(std::string_view(text).substr(0, text.size() - 2), 1, 1000);
    if (text.size() > 1 && text.ends_with("s")) return number(std::string_view(text).substr(0, text.size() - 1), 1000, 1);
    return number(text, 1, 1000);  // bare numbers are microseconds
  }

  CommandResult tc() {
    if (w_.size() < 2 || w_[1] != "qdisc") fail("tc: only \"tc qdisc\" is supported here");
    if (w_.size() == 2 || w_[2] == "show" || w_[2] == "ls" || w_[2] == "list") {
      std::string only;
      for (std::size_t j = 3; j < w_.size(); ++j) {
        if (w_[j] == "dev") only = need(j + 1, "device"), ++j;
      }
      if (host_) return read("qdisc noqueue 0: dev " + host_->iface() + " root refcnt 2 \n");
      const std::string target = only.empty() ? "" : iface_name(only);
      std::string out;
      for (const auto& i : s_.interfaces) {
        if (!target.empty() && i.name != target) continue;
        if (i.delay_ms > 0) {
          out += "qdisc netem 8001: dev " + i.name + " root refcnt 2 limit 1000 delay " +
                 format_delay(i.delay_ms) + "\n";
        } else {
          out += "qdisc noqueue 0: dev " + i.name + " root refcnt 2 \n";
        }
      }
      return read(out);
    }
    const std::string verb = w_[2];
    if (verb != "add" && verb != "del" && verb != "delete" && verb != "replace" && verb != "change") {
      fail("Command \"" + verb + "\" is unknown, try \"tc qdisc help\".");
    }
    if (host_) write();
    std::string dev;
    bool root = false;
    bool netem = false;
    int delay = -1;
    for (std::size_t j = 3; j < w_.size(); ++j) {
      if (w_[j] == "dev") {
        dev = need(++j, "device");
      } else if (w_[j] == "root") {
        root = true;
      } else if (w_[j] == "netem") {
        netem = true;
      } else if (w_[j] == "delay") {
        delay = parse_delay(need(++j, "delay"));
      } else {
        fail("What is \"" + w_[j] + "\"?");
      }
    }
    if (dev.empty() || !root) fail("tc: \"dev <if> root\" is required");
    Interface& i = iface(dev);
    if (verb == "del" || verb == "delete") {
      if (i.delay_ms == 0) fail("Error: Cannot delete qdisc with handle of zero.");
      i.delay_ms = 0;
      return write();
    }
    if (!netem || delay < 0) fail("tc: only \"netem delay <time>\" qdiscs are supported");
    if (verb == "add" && i.delay_ms > 0) fail("Error: Exclusivity flag on, cannot modify.");
    if (verb == "change" && i.delay_ms == 0) fail("Error: Qdisc not found. To create specify NLM_F_CREATE flag.");
    i.delay_ms = delay;
    return write();
  }
};

bool compound(std::string_view command) {
  for (const char c : command) {
    if (c == ';' || c == '&' || c == '|' || c == '`' || c == '>' || c == '<' || c == '\n') return true;
  }
  return command.find("$(") != std::string_view::npos;
}

}  // namespace

CommandResult exec_command(NetState& state, std::string_view machine, std::string_view command) {
  const std::string m = text::trim(machine);
  const Host* host = nullptr;
  bool router = m == state.router_name() || m == "r0";
  if (!router) {
    for (const auto& h : state.hosts) {
      if (m == h.name || state.prefix + m == h.name) host = &h;
    }
    if (!host) return {StepKind::kInvalid, "Unknown machine \"" + m + "\"."};
  }

  const std::string cmd = text::trim(command);
  if (cmd.empty()) return {StepKind::kInvalid, "Empty command."};
  if (compound(cmd)) {
    return {StepKind::kInvalid,
            "Compound commands, pipes and redirections are not supported; send exactly one command."};
  }
  const auto words = text::shell_words(cmd);
  if (!words || words->empty()) return {StepKind::kInvalid, "Unterminated quote in command."};
  const std::string& head = words->front();
  if (head == "sudo") return {StepKind::kInvalid, "Do not use sudo; commands already run as root."};
  if (head == "vtysh") return {StepKind::kInvalid, "vtysh is not permitted in this environment."};
  if (head.rfind("ping", 0) == 0 || head == "traceroute" || head == "mtr") {
    return {StepKind::kInvalid,
            "Ping-style commands are not permitted; the pingall result is shown after each command."};
  }

  NetState scratch = state;
  const Host* scratch_host = nullptr;
  if (host) scratch_host = &scratch.hosts[static_cast<std::size_t>(host - state.hosts.data())];
  try {
    Shell shell(scratch, scratch_host, *words);
    CommandResult result = shell.run();
    if (result.kind == StepKind::kWrite) state = std::move(scratch);
    return result;
  } catch (const CmdError& e) {
    return {StepKind::kInvalid, e.message};
  }
}

}  // namespace netbench::routing
