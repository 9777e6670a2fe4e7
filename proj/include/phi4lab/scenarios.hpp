#pragma once

#include <string>
#include <vector>

#include "phi4lab/config.hpp"
#include "phi4lab/field_io.hpp"

namespace phi4lab {

struct ScenarioResult {
    std::string scenario;
    std::vector<VerdictEntry> criteria;
    std::vector<std::string> artifacts;  // files written (CSVs, verdict)
    double wall_seconds = 0.0;

    bool pass() const;
    // the entry with this criterion name; throws std::out_of_range if absent
    const VerdictEntry& criterion(const std::string& name) const;
};

const std::vector<std::string>& scenario_names();

// Run one named experiment: writes its CSV artifacts and a verdict JSON
// under cfg.out_dir (created if needed) and returns every criterion
// verdict. Deterministic given cfg. Unknown names throw
// std::invalid_argument.
ScenarioResult run_scenario(const std::string& name, const LabConfig& cfg);

}  // namespace phi4lab
