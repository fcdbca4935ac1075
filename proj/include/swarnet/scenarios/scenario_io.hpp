#pragma once

#include <filesystem>
#include <string>

#include "swarnet/scenarios/scenario.hpp"

namespace swarnet::scenarios {

// Throws ScenarioError on malformed input.
ScenarioSpec parse_scenario(const std::string& json_text);
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const ScenarioSpec& spec);
void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);

}  // namespace swarnet::scenarios
