#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nslab {

enum class CheckStatus { Pass, Soft, Fail };

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    std::string detail;
};

struct ExperimentOutcome {
    std::string experiment;
    nlohmann::json summary;
    std::vector<CheckResult> checks;
    int exit_code() const;
};

struct CatalogEntry {
    std::string name;
    std::string tier;     // "", "D", "D1", "D2"
    std::string verifies; // functional anchor of what the run exercises
    std::string description;
};

const std::vector<CatalogEntry>& experiment_catalog();

/// Defaults for one experiment, fully populated (every key has a value).
nlohmann::json default_config(const std::string& experiment);

/// Schema validation; returns human-readable problems (empty = valid).
std::vector<std::string> validate_config(const nlohmann::json& cfg);

/// Apply a dotted key override ("solver.cg_tol=1e-8") onto a config.
void apply_override(nlohmann::json& cfg, const std::string& key_eq_value);

std::uint64_t config_hash(const nlohmann::json& cfg);

/// Runs the experiment, writes CSV/JSON artifacts and a MANIFEST under
/// out_dir/<experiment>, and returns the outcome with its checks.
ExperimentOutcome run_experiment(const nlohmann::json& cfg);

}  // namespace nslab
