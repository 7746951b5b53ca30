#include "netbench/agents/prompt.hpp"

#include "netbench/core/error.hpp"

namespace netbench::agents {

namespace {

std::string status_heading(App app) {
  switch (app) {
    case App::kCp:
      return "Topology summary";
    case App::kRouting:
      return "Latest pingall result";
    case App::kK8s:
      return "Latest connectivity check";
  }
  return "Status";
}

std::string style_note(PromptStyle style) {
  switch (style) {
    case PromptStyle::kPlain:
      return "";
    case PromptStyle::kChainOfThought:
      return "Think through the problem step by step before writing the JSON object.\n";
    case PromptStyle::kFewShot:
      return "Example replies:\n{\"machine\": \"r0\", \"command\": \"ip route\"}\n"
             "{\"command\": \"kubectl get networkpolicy\"}\n{\"final_answer\": {\"program\": []}}\n";
    case PromptStyle::kReact:
      return "Write a short Thought line, then the Action as one JSON object.\n";
  }
  return "";
}

}  // namespace

PromptStyle parse_prompt_style(std::string_view name) {
  if (name == "plain") return PromptStyle::kPlain;
  if (name == "cot") return PromptStyle::kChainOfThought;
  if (name == "few-shot") return PromptStyle::kFewShot;
  if (name == "react") return PromptStyle::kReact;
  throw Error(ErrorCode::kInvalidValue, "prompt style must be plain, cot, few-shot or react");
}

std::string render_prompt(App app, const QuerySpec& query, const Observation& observation, PromptStyle style) {
  std::string out = observation.prompt_header;
  out += "\n\nTask: " + query.prompt_text + "\n\n" + status_heading(app) + ":\n" + observation.system_status + "\n";
  if (!observation.history.empty()) {
    out += "\nPrevious commands and their outputs:\n";
    for (std::size_t i = 0; i < observation.history.size(); ++i) {
      const auto& [message, output] = observation.history[i];
      out += "[" + std::to_string(i + 1) + "] " + message + "\n" + output + "\n";
    }
  }
  out += "\n" + style_note(style) + "Reply with one JSON object.";
  return out;
}

}  // namespace netbench::agents
