#pragma once

#include <string>
#include <string_view>

#include "netbench/core/episode.hpp"
#include "netbench/core/query.hpp"

namespace netbench::agents {

/// Prompting variants. Only kPlain is used by the built-in agents.
enum class PromptStyle { kPlain, kChainOfThought, kFewShot, kReact };

/// Throws kInvalidValue.
PromptStyle parse_prompt_style(std::string_view name);

/// Instruction header, task, current status and the full command history.
/// Pure in its arguments.
std::string render_prompt(App app, const QuerySpec& query, const Observation& observation,
                          PromptStyle style = PromptStyle::kPlain);

}  // namespace netbench::agents
