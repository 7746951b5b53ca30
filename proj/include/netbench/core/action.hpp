#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "netbench/core/error.hpp"

namespace netbench {

/// A parameterized action a(θ): the name selects the transition, operands are
/// its arguments in signature order (node names, interface names, method
/// indices, literal command text).
struct ActionSpec {
  std::string name;
  std::vector<std::string> operands;

  friend bool operator==(const ActionSpec&, const ActionSpec&) = default;
};

/// "add(a, b)" rendering used in transcripts and error messages.
std::string to_string(const ActionSpec& action);

void to_json(nlohmann::json& j, const ActionSpec& action);
void from_json(const nlohmann::json& j, ActionSpec& action);

/// An application's transition system. `validate` checks the action name and
/// arity against the registered signatures (throwing kUnknownAction or
/// kArityMismatch); `apply` executes it, throwing any other Error when the
/// action's own precondition fails.
template <typename System>
concept TransitionSystem = requires(typename System::State& state, const ActionSpec& action) {
  { System::validate(action) } -> std::same_as<void>;
  { System::apply(state, action) } -> std::same_as<void>;
};

/// Left-to-right application of `program` to a copy of `state`. Failures are
/// rethrown as CompositionError carrying the failing index; errors raised by
/// the action itself map to kApplicationRejected unless they are signature
/// errors.
template <TransitionSystem System>
typename System::State compose_actions(typename System::State state,
                                       std::span<const ActionSpec> program) {
  for (std::size_t i = 0; i < program.size(); ++i) {
    try {
      System::validate(program[i]);
    } catch (const Error& e) {
      throw CompositionError(e.code(), i, e.what());
    }
    try {
      System::apply(state, program[i]);
    } catch (const Error& e) {
      throw CompositionError(ErrorCode::kApplicationRejected, i, e.what());
    }
  }
  return state;
}

}  // namespace netbench
