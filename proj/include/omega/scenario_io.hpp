#pragma once

#include "omega/harness.hpp"
#include "omega/sweep.hpp"

#include <json.hpp>

#include <string>

namespace omega {

// JSON scenario and sweep files. Keys mirror the Scenario / SweepSpec fields;
// unknown keys are rejected. Relative edge-list paths resolve against base_dir.
Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir = "", Scenario base = {});
nlohmann::json scenario_to_json(const Scenario& sc);

SweepSpec sweep_from_json(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json sweep_to_json(const SweepSpec& spec);

nlohmann::json result_to_json(const RunResult& r);

// Reads and parses a JSON file; errors name the file.
nlohmann::json load_json_file(const std::string& path);

}  // namespace omega
