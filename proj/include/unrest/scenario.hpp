#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unrest/analysis.hpp"
#include "unrest/model.hpp"
#include "unrest/pde.hpp"

namespace unrest {

// Raw sections-and-keys document, before any compilation. Keys keep file
// order ([constants] entries may reference earlier ones).
struct ScenarioDoc {
    std::string origin; // path, for diagnostics
    std::string name;   // preamble "name =" key
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections;

    std::vector<std::pair<std::string, std::string>>* find_section(const std::string& name);
    const std::vector<std::pair<std::string, std::string>>* find_section(
        const std::string& name) const;
};

// Parses the INI-style scenario text. Full-line comments start with '#' or
// ';'. Throws ConfigSyntax with a line number on malformed input,
// ConfigSchema on unknown sections or duplicate keys.
ScenarioDoc parse_scenario_text(const std::string& text, const std::string& origin);
ScenarioDoc parse_scenario_file(const std::string& path);

// Sets `section.key` (e.g. "model.v_b", "constants.L") to a new raw value,
// replacing any existing entry. "name" targets the preamble name. Returns
// true when an existing value was replaced.
bool apply_override(ScenarioDoc& doc, const std::string& dotted_key, const std::string& value);

struct SweepSpec {
    std::string parameter; // dotted override path
    std::vector<double> values;
};

struct Scenario {
    std::string name;
    ModelSpec model;
    std::map<std::string, double> constants;
    GridSpec grid;
    SimParams params;
    CompiledExpr u0, v0;
    Thresholds thresholds;
    AssumptionReport report; // always all-pass (instantiation throws otherwise)
    std::optional<SweepSpec> sweep;
};

// Compiles and validates the whole bundle: schema check, constants in file
// order, expressions (errors are rephrased with the offending field name),
// validate_model (AssumptionViolation with the report embedded on failure),
// CFL, and an eager initial-data sampling pass (InvalidInitialData).
Scenario instantiate(const ScenarioDoc& doc);

Scenario load_scenario(const std::string& path);

} // namespace unrest
