#include "netbench/core/action.hpp"

namespace netbench {

std::string to_string(const ActionSpec& action) {
  std::string out = action.name + "(";
  for (std::size_t i = 0; i < action.operands.size(); ++i) {
    if (i != 0) out += ", ";
    out += action.operands[i];
  }
  out += ")";
  return out;
}

void to_json(nlohmann::json& j, const ActionSpec& action) {
  j = nlohmann::json{{"name", action.name}, {"operands", action.operands}};
}

void from_json(const nlohmann::json& j, ActionSpec& action) {
  j.at("name").get_to(action.name);
  action.operands = j.value("operands", std::vector<std::string>{});
}

}  // namespace netbench
