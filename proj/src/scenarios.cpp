#include "hjn/scenarios.hpp"

#include "hjn/scenarios_data.hpp"

namespace hjn {

const std::vector<ScenarioEntry>& builtin_scenarios() {
  static const std::vector<ScenarioEntry> entries = [] {
    std::vector<ScenarioEntry> out;
    for (const auto& [name, text] : detail::kScenarioTexts) {
      const ScenarioConfig c = ScenarioConfig::parse(text, name);
      out.push_back({name, c.description, text});
    }
    return out;
  }();
  return entries;
}

std::vector<ScenarioEntry> list_scenarios(const std::string& filter) {
  std::vector<ScenarioEntry> out;
  for (const auto& e : builtin_scenarios()) {
    if (e.name.find(filter) != std::string::npos) out.push_back(e);
  }
  return out;
}

std::optional<ScenarioConfig> find_scenario(const std::string& name) {
  for (const auto& e : builtin_scenarios()) {
    if (e.name == name) return ScenarioConfig::parse(e.text, e.name);
  }
  return std::nullopt;
}

}  // namespace hjn
