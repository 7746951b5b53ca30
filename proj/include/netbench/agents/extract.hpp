#pragma once

#include <string_view>

#include "netbench/core/episode.hpp"

namespace netbench::agents {

/// Finds the first JSON object in free text holding a nonempty string
/// "command" (with optional "machine") or a "final_answer". Later command
/// objects are dropped and noted in the message's warning. A reply whose
/// whole text is a JSON string is unwrapped first. Never throws; failures come
/// back with `message` empty and `error` set.
AgentReply extract_message(std::string_view text);

}  // namespace netbench::agents
