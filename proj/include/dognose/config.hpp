#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "dognose/scenarios.hpp"

namespace dognose {

nlohmann::json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

ScenarioSpec load_scenario_file(const std::string& path);
void save_scenario_file(const ScenarioSpec& spec, const std::string& path);

// Applies dotted-path overrides ("inhale_schedule.duty=0.6") on top of the
// spec's JSON form and re-parses, so overrides see exactly the config schema.
ScenarioSpec apply_overrides(const ScenarioSpec& spec, const std::vector<std::string>& overrides);

}  // namespace dognose
