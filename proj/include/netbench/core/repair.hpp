#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <vector>

#include "netbench/core/action.hpp"

namespace netbench {

/// Searches for an interleaving of inverse-action groups (each group keeps its
/// internal order) in which every step passes `step_safe(before, after)` and
/// the final state's digest equals `target_digest`. Reactive generators use it
/// to certify that the oracle's repair is safe under the step-safety rule, and
/// resample the injection when no such interleaving exists.
///
/// Groups are small (at most a handful of commands), so plain DFS with a
/// dead-position memo is enough.
template <typename State, typename Apply, typename StepSafe, typename Digest>
std::optional<std::vector<ActionSpec>> find_safe_ordering(
    const State& start, const std::vector<std::vector<ActionSpec>>& groups, Apply&& apply,
    StepSafe&& step_safe, Digest&& digest, const std::string& target_digest) {
  std::vector<std::size_t> position(groups.size(), 0);
  std::set<std::vector<std::size_t>> dead;
  std::vector<ActionSpec> order;

  auto search = [&](auto&& self, const State& state) -> bool {
    bool exhausted = true;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (position[g] < groups[g].size()) exhausted = false;
    }
    if (exhausted) return digest(state) == target_digest;
    if (dead.contains(position)) return false;

    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (position[g] >= groups[g].size()) continue;
      const ActionSpec& action = groups[g][position[g]];
      State next = state;
      if (!apply(next, action)) continue;
      if (!step_safe(state, next)) continue;
      ++position[g];
      order.push_back(action);
      if (self(self, next)) return true;
      order.pop_back();
      --position[g];
    }
    dead.insert(position);
    return false;
  };

  if (!search(search, start)) return std::nullopt;
  return order;
}

}  // namespace netbench
