#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "netbench/core/action.hpp"
#include "netbench/routing/state.hpp"

namespace netbench::routing {

enum class Family { kDisableRouting, kDisableInterface, kRemoveIp, kDropTraffic, kWrongRouting };

/// Short label: DR, DI, RI, DT, WR.
std::string_view to_label(Family family);
/// Action name: disable_routing, disable_interface, remove_ip, drop_traffic, wrong_routing.
std::string_view action_name(Family family);
/// Accepts either form; throws kUnknownFamily.
Family parse_family(std::string_view text);
/// DR:4, DI:3, RI:4, DT:4, WR:4.
int method_count(Family family);

/// Router commands an injection action stands for, and the commands that
/// undo it, both computed against the state it is applied to.
struct Expansion {
  std::vector<std::string> commands;
  std::vector<std::string> inverse;
};

/// Family actions carry three operands: method ("m1".."m4"), target
/// interface (full name, or "-"), and a method value ("-" when unused):
///   DI m3 mtu, RI m2 last octet of 10.0.0.X, RI m3 mask length,
///   RI m4 and WR other subnet number, DT m4 delay in ms.
/// Throws kUnknownFamily, kMethodOutOfRange or kInvalidValue.
Expansion expand(const NetState& state, const ActionSpec& action);

struct InjectionRecord {
  ActionSpec action;
  std::vector<std::string> commands;
  std::vector<std::string> inverse;
};

/// Samples the method's target and value from `seed`, applies the injection
/// to `state` and records it. Throws kMethodOutOfRange for a bad method and
/// kIneffectiveInjection (leaving `state` untouched) when pingall still shows
/// no failures.
InjectionRecord inject_error(NetState& state, Family family, int method, std::uint64_t seed);

/// Transition system over NetState: the five family actions above plus
/// exec(machine, command), which runs one shell command and fails unless it
/// is a successful write or read.
struct RoutingSystem {
  using State = NetState;
  static void validate(const ActionSpec& action);
  static void apply(NetState& state, const ActionSpec& action);
};

}  // namespace netbench::routing
