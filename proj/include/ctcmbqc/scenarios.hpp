#pragma once

// Named reproduction runs. Each scenario recomputes a published result and
// checks it against its closed form or locked value.

#include <cstdint>
#include <string>
#include <vector>

#include "ctcmbqc/report.hpp"

namespace ctcmbqc {

struct ScenarioOptions {
    double theta = 0.7;
    double tol = 1e-10;
    std::uint64_t seed = 0;
};

struct ScenarioCheck {
    std::string name;
    bool passed = false;
    /// Human-readable observed and expected values.
    std::string observed;
    std::string expected;
};

struct ScenarioResult {
    std::string name;
    std::vector<ScenarioCheck> checks;
    /// Scenario-specific numbers for the JSON report.
    Json details = Json::object();

    bool passed() const;
};

std::vector<std::string> scenario_names();

/// Throws Validation for an unknown name.
ScenarioResult run_scenario(const std::string &name, const ScenarioOptions &options);

Json to_json(const ScenarioResult &r);
std::string to_text(const ScenarioResult &r);

}  // namespace ctcmbqc
