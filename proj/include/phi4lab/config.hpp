#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace phi4lab {

// One flat document of lab knobs. Scenarios read what they need; the
// parser is strict so a typo cannot silently fall back to a default.
struct LabConfig {
    // grid
    int dim = 1;
    int points = 64;

    // exponents
    double epsilon = 0.1;  // must stay in (0, 1/4]
    double eta = 0.05;     // mildness of the Z-field roughness

    // solver
    double dt = 1e-3;
    double m_tol = 1e-8;

    // coupling
    std::vector<double> ells = {2.0, 4.0, 8.0};
    int replicas = 200;
    int windows = 1;

    // coefficient synthesis
    double a_offset = 1.0;
    double a_amp = 0.2;
    double a_floor = 0.25;
    double b_amp = 0.2;
    double z2_amp = 0.2;
    double z1_amp = 0.2;
    double z0_amp = 0.2;
    // the forcing keeps a positive mean (non-centered tree products), which
    // holds the attractor away from zero and the cubic damping active
    double z0_offset = 3.5;
    double tree_amp = 0.05;
    double tree_offset = 0.1;

    // reporting
    double c_cap = 100.0;
    std::uint64_t seed = 2026;
    std::string out_dir = "out";
};

// profile = "smoke" (1d, 64 points, dt 1e-3) or "full" (3d, 32 points per
// axis, dt 5e-4); anything else throws std::invalid_argument
LabConfig default_config(const std::string& profile = "smoke");

// Parse "key = value" lines over a base config. '#' starts a comment,
// blank lines are fine. Unknown keys, malformed lines, and out-of-range
// values throw std::invalid_argument with the 1-based line number.
LabConfig parse_config(const std::string& text,
                       const LabConfig& base = LabConfig{});

// read the file and delegate to parse_config; missing file throws
// std::runtime_error
LabConfig load_config(const std::string& path,
                      const LabConfig& base = LabConfig{});

// the validation used by both entry points; throws std::invalid_argument
void validate_config(const LabConfig& cfg);

}  // namespace phi4lab
