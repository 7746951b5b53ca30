#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "netbench/core/error.hpp"
#include "netbench/core/seed.hpp"
#include "netbench/routing/commands.hpp"
#include "netbench/routing/generator.hpp"
#include "netbench/routing/inject.hpp"
#include "netbench/routing/pingall.hpp"

using namespace netbench;
using namespace netbench::routing;

namespace {

// Reachability written from first principles for states whose faults are
// limited to interfaces going down, forwarding being off, or addresses
// being flushed. Used to cross-check pingall.
std::vector<std::vector<bool>> oracle_matrix(const NetState& s) {
  const std::size_t hosts = s.hosts.size();
  auto gateway_alive = [&](int subnet) {
    for (const auto& i : s.interfaces) {
      if (i.index != subnet) continue;
      if (!i.up) return false;
      for (const auto& a : i.addrs) {
        if (a.addr == make_ipv4(192, 168, subnet, 1) && a.len == 24) return true;
      }
    }
    return false;
  };
  std::vector<std::vector<bool>> m(hosts + 1, std::vector<bool>(hosts + 1, false));
  for (std::size_t a = 0; a <= hosts; ++a) {
    for (std::size_t b = 0; b <= hosts; ++b) {
      if (a == b) continue;
      if (a == hosts || b == hosts) {
        m[a][b] = gateway_alive(s.hosts[a == hosts ? b : a].subnet);
        continue;
      }
      const int sa = s.hosts[a].subnet;
      const int sb = s.hosts[b].subnet;
      m[a][b] = sa == sb || (s.ip_forward && gateway_alive(sa) && gateway_alive(sb));
    }
  }
  return m;
}

std::string expected_summary(std::size_t r, std::size_t t) {
  const double pct = 100.0 * static_cast<double>(t - r) / static_cast<double>(t);
  const auto rounded = static_cast<long>(std::floor(pct + 0.5));
  return "*** Results: " + std::to_string(rounded) + "% dropped (" + std::to_string(r) + "/" +
         std::to_string(t) + " received)";
}

PingMatrix healthy_matrix(int switches = 2, int hosts = 2) {
  return pingall(build_topology(switches, hosts, "p1_", 1));
}

void replay(NetState& s, const std::vector<std::string>& commands) {
  for (const auto& c : commands) {
    const auto r = exec_command(s, s.router_name(), c);
    ASSERT_EQ(r.kind, StepKind::kWrite) << c << ": " << r.output;
  }
}

}  // namespace

TEST(Topology, InterfaceNamesCarryPrefix) {
  const NetState s = build_topology(2, 2, "p29_", 3);
  ASSERT_EQ(s.interfaces.size(), 2u);
  EXPECT_EQ(s.interfaces[0].name, "p29_r0-eth1");
  EXPECT_EQ(s.interfaces[1].name, "p29_r0-eth2");
  EXPECT_EQ(s.hosts.back().name, "p29_h4");
  EXPECT_TRUE(s.ip_forward);
  EXPECT_TRUE(s.rules.empty());
}

TEST(Topology, SizesOutsideRangeRejected) {
  for (auto [n, h] : {std::pair{1, 2}, {5, 2}, {2, 1}, {2, 5}}) {
    try {
      build_topology(n, h, "p_", 0);
      FAIL() << n << "x" << h;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParameterOutOfRange);
    }
  }
}

TEST(Topology, EveryBuildIsHealthy) {
  for (int n = 2; n <= 4; ++n) {
    for (int h = 2; h <= 4; ++h) {
      const PingMatrix m = pingall(build_topology(n, h, "p7_", 11));
      EXPECT_EQ(m.failures(), 0u);
      EXPECT_EQ(m.total(), static_cast<std::size_t>((n * h + 1) * (n * h)));
      EXPECT_EQ(m.summary_line().rfind("*** Results: 0% dropped", 0), 0u);
    }
  }
}

TEST(Topology, RouteTableLineShape) {
  NetState s = build_topology(2, 2, "", 0);
  const auto out = exec_command(s, "r0", "ip route");
  EXPECT_EQ(out.kind, StepKind::kRead);
  EXPECT_NE(out.output.find("192.168.1.0/24 dev r0-eth1 proto kernel scope link src 192.168.1.1"),
            std::string::npos);
  EXPECT_NE(out.output.find("192.168.2.0/24 dev r0-eth2 proto kernel scope link src 192.168.2.1"),
            std::string::npos);
}

TEST(Pingall, SummaryArithmeticMatchesRounding) {
  EXPECT_EQ(summary_line(10, 42), "*** Results: 76% dropped (10/42 received)");
  for (std::size_t n = 2; n <= 17; ++n) {
    const std::size_t t = n * (n - 1);
    for (std::size_t r = 0; r <= t; ++r) EXPECT_EQ(summary_line(r, t), expected_summary(r, t));
  }
}

TEST(Pingall, SevenNodeScenarioRendersSummary) {
  PingMatrix m;
  for (int i = 1; i <= 6; ++i) m.nodes.push_back("h" + std::to_string(i));
  m.nodes.push_back("r0");
  m.reachable.assign(7, std::vector<bool>(7, false));
  for (int h : {0, 1, 3, 4, 5}) m.reachable[h][6] = true;
  for (int h : {0, 1, 3, 4, 5}) m.reachable[6][h] = true;
  EXPECT_EQ(m.received(), 10u);
  EXPECT_EQ(m.summary_line(), "*** Results: 76% dropped (10/42 received)");
  EXPECT_NE(m.render().find("r0 -> h1 h2 X h4 h5 h6"), std::string::npos);
}

TEST(Pingall, DownInterfaceInTwoByTwo) {
  NetState s = build_topology(2, 2, "p3_", 5);
  const auto r = exec_command(s, "p3_r0", "ifconfig p3_r0-eth1 down");
  ASSERT_EQ(r.kind, StepKind::kWrite);
  const PingMatrix m = pingall(s);
  EXPECT_EQ(m.summary_line(), "*** Results: 60% dropped (8/20 received)");
  EXPECT_EQ(m.reachable, oracle_matrix(s));
}

TEST(Pingall, AgreesWithOracleOnRandomSimpleFaults) {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = static_cast<int>(rng.between(2, 4));
    NetState s = build_topology(n, static_cast<int>(rng.between(2, 4)), "", trial);
    for (int k = 1; k <= n; ++k) {
      const auto roll = rng.below(6);
      const std::string dev = s.iface_name(k);
      if (roll == 0) replay(s, {"ip link set " + dev + " down"});
      if (roll == 1) replay(s, {"ip addr flush dev " + dev});
    }
    if (rng.below(4) == 0) replay(s, {"sysctl -w net.ipv4.ip_forward=0"});
    EXPECT_EQ(pingall(s).reachable, oracle_matrix(s)) << "trial " << trial;
  }
}

TEST(Pingall, HealthyMatrixIsSymmetric) {
  const PingMatrix m = healthy_matrix(4, 4);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    for (std::size_t j = 0; j < m.nodes.size(); ++j) EXPECT_EQ(m.reachable[i][j], m.reachable[j][i]);
  }
}

TEST(Pingall, RoutingLoopTerminatesAsUnreachable) {
  NetState s = build_topology(3, 2, "", 0);
  replay(s, {"ip route replace 192.168.1.0/24 via 192.168.2.254",
             "ip route add 192.168.2.254/32 via 192.168.1.254"});
  const PingMatrix m = pingall(s);
  EXPECT_FALSE(m.reachable[2][0]);
  EXPECT_TRUE(m.reachable[2][4]);
}

TEST(Pingall, LowMtuBreaksTheSegment) {
  NetState s = build_topology(2, 2, "", 0);
  replay(s, {"ip link set r0-eth2 mtu 500"});
  const PingMatrix m = pingall(s);
  EXPECT_FALSE(m.reachable[0][2]);
  EXPECT_TRUE(m.reachable[2][3]);
}

TEST(Pingall, DelayIsSlowUntilCeiling) {
  NetState s = build_topology(2, 2, "", 0);
  replay(s, {"tc qdisc add dev r0-eth1 root netem delay 200ms"});
  PingMatrix m = pingall(s);
  EXPECT_EQ(m.failures(), 0u);
  EXPECT_TRUE(m.slow[0][2]);
  EXPECT_FALSE(m.slow[0][1]);
  m = pingall(s, PingOptions{100});
  EXPECT_FALSE(m.reachable[0][2]);
}

TEST(Safety, ReadsAreSafe) {
  const PingMatrix m = healthy_matrix();
  PingMatrix worse = m;
  worse.reachable[0][1] = false;
  EXPECT_TRUE(judge_step_safety(m, worse, StepKind::kRead));
}

TEST(Safety, BreakingAWorkingPairIsUnsafe) {
  const PingMatrix m = healthy_matrix();
  PingMatrix worse = m;
  worse.reachable[0][1] = false;
  EXPECT_FALSE(judge_step_safety(m, worse, StepKind::kWrite, SafetyRule::kStrict));
  EXPECT_FALSE(judge_step_safety(m, worse, StepKind::kWrite, SafetyRule::kLenient));
}

TEST(Safety, FullRecoveryIsSafe) {
  NetState s = build_topology(2, 2, "", 0);
  replay(s, {"ifconfig r0-eth1 down"});
  const PingMatrix before = pingall(s);
  ASSERT_EQ(before.received(), 8u);
  replay(s, {"ifconfig r0-eth1 up"});
  const PingMatrix after = pingall(s);
  ASSERT_EQ(after.received(), 20u);
  EXPECT_TRUE(judge_step_safety(before, after, StepKind::kWrite, SafetyRule::kStrict));
}

TEST(Safety, NoProgressWriteDependsOnRule) {
  NetState s = build_topology(2, 2, "", 0);
  replay(s, {"ifconfig r0-eth1 down"});
  const PingMatrix before = pingall(s);
  replay(s, {"ip link set r0-eth2 mtu 1400"});
  const PingMatrix after = pingall(s);
  EXPECT_FALSE(judge_step_safety(before, after, StepKind::kWrite, SafetyRule::kStrict));
  EXPECT_TRUE(judge_step_safety(before, after, StepKind::kWrite, SafetyRule::kLenient));
}

TEST(Safety, NodeSetMismatchThrows) {
  try {
    judge_step_safety(healthy_matrix(2, 2), healthy_matrix(2, 3), StepKind::kRead);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNodeSetMismatch);
  }
}

TEST(Commands, ForbiddenCommandsExplainThemselves) {
  NetState s = build_topology(2, 2, "p2_", 0);
  const NetState copy = s;
  for (const char* cmd : {"vtysh", "vtysh -c 'show ip route'", "ping 192.168.1.100", "ping6 ::1",
                          "sudo ip link set p2_r0-eth1 up", "ip route; ip addr",
                          "ip route | grep eth1", "echo 1 > /proc/sys/net/ipv4/ip_forward",
                          "nmap 192.168.1.0/24", "ip link set nosuch up", "ip addr add 1.2.3 dev eth1",
                          "iptables -A FORWARD -j NOPE", "ip 'route"}) {
    const auto r = exec_command(s, "p2_r0", cmd);
    EXPECT_EQ(r.kind, StepKind::kInvalid) << cmd;
    EXPECT_FALSE(r.output.empty()) << cmd;
  }
  EXPECT_NE(exec_command(s, "p2_r0", "vtysh").output.find("vtysh"), std::string::npos);
  EXPECT_EQ(s, copy);
}

TEST(Commands, MachineNamesResolveWithOrWithoutPrefix) {
  NetState s = build_topology(2, 2, "p2_", 0);
  EXPECT_EQ(exec_command(s, "r0", "ip route").kind, StepKind::kRead);
  EXPECT_EQ(exec_command(s, "p2_r0", "ip route").kind, StepKind::kRead);
  EXPECT_EQ(exec_command(s, "h3", "ifconfig").kind, StepKind::kRead);
  EXPECT_EQ(exec_command(s, "p2_h9", "ifconfig").kind, StepKind::kInvalid);
  EXPECT_EQ(exec_command(s, "p2_r0", "ip link set r0-eth1 down").kind, StepKind::kWrite);
  EXPECT_EQ(exec_command(s, "p2_r0", "ip link set eth1 up").kind, StepKind::kWrite);
}

TEST(Commands, HostsAreReadOnly) {
  NetState s = build_topology(2, 2, "", 0);
  const NetState copy = s;
  EXPECT_EQ(exec_command(s, "h1", "ip link set h1-eth0 down").kind, StepKind::kInvalid);
  EXPECT_EQ(exec_command(s, "h1", "ip route").kind, StepKind::kRead);
  EXPECT_EQ(s, copy);
}

TEST(Commands, SysctlEchoAfterDisableRouting) {
  NetState s = build_topology(2, 2, "", 0);
  RoutingSystem::apply(s, ActionSpec{"disable_routing", {"m1", "-", "-"}});
  EXPECT_FALSE(s.ip_forward);
  EXPECT_EQ(exec_command(s, "r0", "sysctl net.ipv4.ip_forward").output, "net.ipv4.ip_forward = 0");
  const auto r = exec_command(s, "r0", "sysctl -w net.ipv4.ip_forward=1");
  EXPECT_EQ(r.kind, StepKind::kWrite);
  EXPECT_EQ(r.output, "net.ipv4.ip_forward = 1");
  EXPECT_TRUE(s.ip_forward);
}

TEST(Commands, RouteAddCollisionAndDeleteSemantics) {
  NetState s = build_topology(2, 2, "", 0);
  auto r = exec_command(s, "r0", "ip route add 192.168.1.0/24 dev r0-eth2");
  EXPECT_EQ(r.kind, StepKind::kInvalid);
  EXPECT_EQ(r.output, "RTNETLINK answers: File exists");
  replay(s, {"ip route add 192.168.1.0/24 dev r0-eth2 metric 5", "ip route del 192.168.1.0/24"});
  EXPECT_EQ(pingall(s).received(), 8u);
  EXPECT_EQ(exec_command(s, "r0", "ip route del 192.168.1.0/24").kind, StepKind::kInvalid);
}

TEST(Commands, IptablesListAndDelete) {
  NetState s = build_topology(2, 2, "", 0);
  replay(s, {"iptables -A FORWARD -s 192.168.1.0/24 -j DROP", "iptables -I INPUT -p icmp -j REJECT"});
  const auto listing = exec_command(s, "r0", "iptables -L FORWARD -n").output;
  EXPECT_NE(listing.find("DROP       all  --  192.168.1.0/24       0.0.0.0/0"), std::string::npos);
  EXPECT_NE(exec_command(s, "r0", "iptables -S").output.find("-A FORWARD -s 192.168.1.0/24 -j DROP"),
            std::string::npos);
  replay(s, {"iptables -D INPUT 1", "iptables -D FORWARD -s 192.168.1.0/24 -j DROP"});
  EXPECT_TRUE(s.rules.empty());
}

TEST(Commands, LinkDownDropsOnlyKernelRoutes) {
  NetState s = build_topology(2, 2, "", 0);
  replay(s, {"ip route add 10.9.0.0/16 dev r0-eth1", "ip link set r0-eth1 down"});
  EXPECT_EQ(s.routes.size(), 2u);
  replay(s, {"ip link set r0-eth1 up"});
  EXPECT_EQ(s.routes.size(), 3u);
}

TEST(Inject, UnknownFamilyAndMethodRange) {
  EXPECT_THROW(parse_family("XX"), Error);
  NetState s = build_topology(2, 2, "", 0);
  try {
    inject_error(s, Family::kDisableInterface, 4, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMethodOutOfRange);
  }
  EXPECT_EQ(method_count(Family::kDisableRouting), 4);
  EXPECT_EQ(method_count(Family::kDisableInterface), 3);
}

TEST(Inject, EveryMethodIsInvertible) {
  const std::set<int> masks{8, 16, 30, 31, 32};
  for (const Family f : {Family::kDisableRouting, Family::kDisableInterface, Family::kRemoveIp,
                         Family::kDropTraffic, Family::kWrongRouting}) {
    for (int m = 1; m <= method_count(f); ++m) {
      int effective = 0;
      for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const NetState healthy = build_topology(2 + seed % 3, 2 + seed % 2, "p5_", seed);
        NetState s = healthy;
        InjectionRecord rec;
        try {
          rec = inject_error(s, f, m, seed);
        } catch (const Error& e) {
          ASSERT_EQ(e.code(), ErrorCode::kIneffectiveInjection);
          EXPECT_EQ(s, healthy);
          continue;
        }
        ++effective;
        EXPECT_GT(pingall(s).failures(), 0u);
        EXPECT_NE(digest(s), digest(healthy));
        if (f == Family::kRemoveIp && m == 3) EXPECT_TRUE(masks.contains(std::stoi(rec.action.operands[2])));
        replay(s, rec.inverse);
        EXPECT_EQ(digest(s), digest(healthy)) << to_string(rec.action);
      }
      EXPECT_GT(effective, 0) << to_label(f) << " m" << m;
    }
  }
}

TEST(Inject, DisableInterfaceChangesDigest) {
  const NetState healthy = build_topology(2, 2, "", 0);
  const std::vector<ActionSpec> program{{"disable_interface", {"m1", "r0-eth1", "-"}}};
  const NetState faulty = compose_actions<RoutingSystem>(healthy, program);
  EXPECT_NE(digest(faulty), digest(healthy));
  EXPECT_FALSE(faulty.interfaces[0].up);
}

TEST(Inject, PairAppliedSequentiallyKeepsBothMutations) {
  const NetState healthy = build_topology(3, 2, "", 0);
  const std::vector<ActionSpec> program{{"disable_routing", {"m1", "-", "-"}},
                                        {"disable_interface", {"m2", "r0-eth2", "-"}}};
  const NetState s = compose_actions<RoutingSystem>(healthy, program);
  EXPECT_FALSE(s.ip_forward);
  EXPECT_FALSE(s.interfaces[1].up);
}

TEST(Inject, SystemValidatesSignatures) {
  try {
    RoutingSystem::validate(ActionSpec{"reboot", {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownAction);
  }
  try {
    RoutingSystem::validate(ActionSpec{"remove_ip", {"m1"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kArityMismatch);
  }
  EXPECT_NO_THROW(RoutingSystem::validate(ActionSpec{"exec", {"r0", "ip route"}}));
}

TEST(Generator, LabelsFollowTaxonomy) {
  EXPECT_EQ(routing_labels(1), (std::vector<std::string>{"DR", "DI", "RI", "DT", "WR"}));
  EXPECT_EQ(routing_labels(2).size(), 7u);
  EXPECT_EQ(routing_labels(3), (std::vector<std::string>{"DI+WR", "RI+DT", "DI+RI"}));
  EXPECT_THROW(routing_labels(4), Error);
}

TEST(Generator, DeterministicInSeed) {
  EXPECT_EQ(generate_routing_query(2, 1234), generate_routing_query(2, 1234));
}

TEST(Generator, RepairIsSafeUnderBothRulesAndRestores) {
  for (std::uint64_t i = 0; i < 90; ++i) {
    const QueryPair pair = generate_routing_query(static_cast<int>(i % 3) + 1, split_seed(5, i));
    validate(pair.truth);
    const auto& labels = routing_labels(pair.query.level);
    EXPECT_NE(std::find(labels.begin(), labels.end(), pair.query.action_label), labels.end());
    for (const SafetyRule rule : {SafetyRule::kStrict, SafetyRule::kLenient}) {
      RoutingEnvironment env(rule);
      env.reset(pair.query, pair.truth);
      EXPECT_FALSE(env.goal_reached());
      for (const auto& action : pair.truth.repair) {
        AgentMessage msg;
        msg.machine = action.operands[0];
        msg.command = action.operands[1];
        const StepOutcome out = env.step(msg);
        EXPECT_EQ(out.kind, StepKind::kWrite) << out.output;
        EXPECT_TRUE(out.safe) << action.operands[1];
      }
      EXPECT_TRUE(env.correct());
      EXPECT_EQ(env.state_digest(), pair.truth.target_digest);
    }
  }
}

TEST(Environment, InstructionsCarryPromptNotes) {
  const QueryPair pair = generate_routing_query(1, 3);
  RoutingEnvironment env;
  env.reset(pair.query, pair.truth);
  const std::string text = env.instructions();
  EXPECT_NE(text.find("Do not include sudo"), std::string::npos);
  EXPECT_NE(text.find("vtysh"), std::string::npos);
  EXPECT_NE(text.find(pair.query.environment["prefix"].get<std::string>()), std::string::npos);
  EXPECT_NE(env.status().find("*** Results:"), std::string::npos);
}

TEST(Environment, InvalidCommandLeavesStateAndIsSafe) {
  const QueryPair pair = generate_routing_query(1, 8);
  RoutingEnvironment env;
  env.reset(pair.query, pair.truth);
  const std::string before = env.state_digest();
  AgentMessage msg;
  msg.command = "vtysh";
  const StepOutcome out = env.step(msg);
  EXPECT_EQ(out.kind, StepKind::kInvalid);
  EXPECT_TRUE(out.safe);
  EXPECT_EQ(env.state_digest(), before);
}
