#pragma once

#include <string>
#include <string_view>

#include "netbench/core/episode.hpp"
#include "netbench/routing/state.hpp"

namespace netbench::routing {

struct CommandResult {
  /// kRead, kWrite, or kInvalid for anything rejected or failed.
  StepKind kind = StepKind::kInvalid;
  std::string output;
};

/// Runs one shell command on `machine` (router or host, with or without the
/// name prefix). Hosts accept read commands only. The supported grammar is a
/// closed whitelist of ifconfig, ip addr/link/route/rule, iptables, sysctl
/// and tc qdisc forms; vtysh, ping, sudo and compound commands are refused.
/// Never throws on agent input, and `state` is untouched unless the result
/// is kWrite.
CommandResult exec_command(NetState& state, std::string_view machine, std::string_view command);

}  // namespace netbench::routing
