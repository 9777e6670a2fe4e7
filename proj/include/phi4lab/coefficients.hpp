#pragma once

#include <cstdint>
#include <optional>

#include "phi4lab/field.hpp"
#include "phi4lab/rng.hpp"

namespace phi4lab {

// Target regularity and scale of one synthesized coefficient. alpha is the
// Holder exponent the spectral density encodes; amplitude scales every
// Fourier mode; mean_offset shifts the field after synthesis; floor, when
// set, clamps the result from below (required for the cubic coefficient,
// which must stay positive).
struct RegularitySpec {
    double alpha = 1.0;
    double amplitude = 0.0;
    double mean_offset = 0.0;
    std::optional<double> floor;
};

// Centered Gaussian field with mode standard deviation
//   amplitude * (1 + |k|^2)^(-(alpha + dim/2)/2),
// synthesized with exact Hermitian symmetry so the output is real. The log
// mean squared Fourier amplitude then falls off with slope -2(alpha+dim/2)
// in log |k|. Multi-component outputs draw components independently.
Field synthesize_holder_field(const TorusGrid& grid, double alpha,
                              double amplitude, Rng& rng,
                              int components = 1);

struct CoefficientOptions {
    double frame_dt = 0.05;   // coarse frame spacing of the trajectories
    double corr_time = 0.5;   // OU correlation time between frames
    bool a_zero = false;      // force A identically 0 (linearizable runs)
};

// The random environment of the transformed equation: one trajectory per
// coefficient, all on a shared coarse time grid. b carries dim components;
// everything else is scalar. exp_tree is the positive weight multiplying
// both the noise and the coupling drift.
struct CoefficientSet {
    TorusGrid grid{};
    double frame_dt = 0.05;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    bool a_zero = false;
    double c_a = 0.0;  // (1 + max(sup A, 1/inf A))^2, +inf when a_zero

    FieldTrajectory a, b, z2, z1, z0, exp_tree;

    const Field& a_at(double t) const { return a.at_time(t); }
    const Field& b_at(double t) const { return b.at_time(t); }
    const Field& z2_at(double t) const { return z2.at_time(t); }
    const Field& z1_at(double t) const { return z1.at_time(t); }
    const Field& z0_at(double t) const { return z0.at_time(t); }
    const Field& exp_tree_at(double t) const { return exp_tree.at_time(t); }
};

// Draw the whole environment. Each coefficient evolves as a stationary
// AR(1) chain over the coarse frames (correlation exp(-frame_dt/corr_time))
// whose marginal law is a single synthesize_holder_field draw; offset and
// floor are applied per frame after the chain update. exp_tree = exp(3 G)
// for the smooth field G described by spec_tree. Throws
// std::invalid_argument when spec_a has no floor (unless a_zero) or the
// horizon is not positive.
CoefficientSet make_coefficient_set(
    const TorusGrid& grid, double horizon, const RegularitySpec& spec_a,
    const RegularitySpec& spec_b, const RegularitySpec& spec_z2,
    const RegularitySpec& spec_z1, const RegularitySpec& spec_z0,
    const RegularitySpec& spec_tree, std::uint64_t seed,
    const CoefficientOptions& options = {});

// recompute c_a from the stored A trajectory (consistency check)
double c_a_of(const FieldTrajectory& a_traj, bool a_zero);

// One replica's driving noise. Increments are i.i.d. per-site Gaussians of
// variance dt / cell_volume (cylindrical discretization of space-time white
// noise over one step).
struct NoiseStream {
    TorusGrid grid{};
    double dt = 0.0;
    Rng rng;
    std::uint64_t steps_drawn = 0;

    NoiseStream(const TorusGrid& g, double step, std::uint64_t seed)
        : grid(g), dt(step), rng(seed) {}
};

Field sample_noise_increment(NoiseStream& stream);

}  // namespace phi4lab
