#pragma once

#include <stdexcept>
#include <string>

#include "eqsadj/scenario.hpp"

#include "json.hpp"

namespace eqsadj {

// Raised for malformed scenario files: unreadable, invalid JSON, missing or
// unknown keys, wrong types, unsupported schema version, or failed scenario
// validation. The CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int config_schema_version = 1;

// Strict mapping: every key is checked, unknown keys are rejected with their
// full path.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& sc);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);

// FNV-1a (64 bit) over the canonical serialization, as 16 hex digits; stamped
// into every CSV the tool writes so outputs are traceable to their inputs.
std::string config_hash(const Scenario& sc);

}  // namespace eqsadj
