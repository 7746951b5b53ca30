#include "netbench/agents/extract.hpp"

#include <string>
#include <vector>

namespace netbench::agents {

namespace {

constexpr std::size_t kMaxScan = 1 << 20;

// End of the brace-balanced span starting at `begin`, honoring JSON strings.
std::size_t balanced_end(std::string_view s, std::size_t begin) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = begin; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

std::optional<AgentMessage> usable(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  AgentMessage m;
  if (const auto it = j.find("final_answer"); it != j.end()) {
    m.kind = MessageKind::kFinalAnswer;
    m.answer = *it;
    return m;
  }
  const auto it = j.find("command");
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) return std::nullopt;
  m.command = it->get<std::string>();
  if (const auto mt = j.find("machine"); mt != j.end() && mt->is_string() && !mt->get<std::string>().empty()) {
    m.machine = mt->get<std::string>();
  }
  return m;
}

AgentReply extract(std::string_view text) {
  AgentReply reply;
  reply.raw = std::string(text);
  std::string unwrapped;
  if (const auto whole = nlohmann::json::parse(text, nullptr, false); whole.is_string()) {
    unwrapped = whole.get<std::string>();
    text = unwrapped;
  }
  if (text.size() > kMaxScan) text = text.substr(0, kMaxScan);

  std::vector<AgentMessage> found;
  std::size_t i = text.find('{');
  while (i != std::string_view::npos) {
    const std::size_t end = balanced_end(text, i);
    if (end == std::string_view::npos) break;
    const auto j = nlohmann::json::parse(text.substr(i, end - i + 1), nullptr, false);
    if (auto m = usable(j)) {
      found.push_back(std::move(*m));
      i = text.find('{', end + 1);
    } else {
      i = text.find('{', i + 1);
    }
  }
  if (found.empty()) {
    reply.error = "reply holds no JSON object with a \"command\" or \"final_answer\" key";
    return reply;
  }
  reply.message = std::move(found.front());
  if (found.size() > 1) {
    reply.message->warning = "Only one command runs per turn; " + std::to_string(found.size() - 1) +
                             " additional command(s) were ignored.";
  }
  return reply;
}

}  // namespace

AgentReply extract_message(std::string_view text) {
  try {
    return extract(text);
  } catch (...) {
    AgentReply reply;
    reply.error = "reply could not be parsed";
    return reply;
  }
}

}  // namespace netbench::agents
