#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjn/config.hpp"

namespace hjn {

struct ScenarioEntry {
  std::string name;
  std::string description;
  std::string text;  ///< config source, identical to configs/<name>.conf
};

/// Built-in scenarios in registry order.
const std::vector<ScenarioEntry>& builtin_scenarios();

/// Entries whose name contains `filter`; an empty filter keeps everything.
std::vector<ScenarioEntry> list_scenarios(const std::string& filter = "");

std::optional<ScenarioConfig> find_scenario(const std::string& name);

}  // namespace hjn
