#include "phi4lab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "phi4lab/fft.hpp"

namespace phi4lab {

namespace {

// index of the mode -k (componentwise n - k mod n)
int conjugate_index(const TorusGrid& g, int site) {
    auto c = g.site_coords(site);
    for (int d = 0; d < g.dim; ++d) {
        c[d] = (g.points_per_axis - c[d]) % g.points_per_axis;
    }
    return g.site_index(c);
}

}  // namespace

Field synthesize_holder_field(const TorusGrid& grid, double alpha,
                              double amplitude, Rng& rng, int components) {
    if (components < 1) {
        throw std::invalid_argument("synthesize_holder_field: components");
    }
    const int n = grid.total_points();
    const double decay = -(alpha + 0.5 * grid.dim) / 2.0;
    Field out(grid, components);
    std::vector<std::complex<double>> coeffs(n);
    for (int c = 0; c < components; ++c) {
        std::fill(coeffs.begin(), coeffs.end(), std::complex<double>(0.0));
        for (int i = 0; i < n; ++i) {
            const int j = conjugate_index(grid, i);
            if (j < i) continue;  // already filled from its partner
            const double sigma =
                amplitude * std::pow(1.0 + grid.k_squared(i), decay);
            if (j == i) {
                coeffs[i] = sigma * rng.gaussian();
            } else {
                const double re = rng.gaussian();
                const double im = rng.gaussian();
                const std::complex<double> z(re / std::sqrt(2.0),
                                             im / std::sqrt(2.0));
                coeffs[i] = sigma * z;
                coeffs[j] = std::conj(sigma * z);
            }
        }
        const std::vector<double> frame = idft(grid, coeffs);
        std::copy(frame.begin(), frame.end(),
                  out.component_mut(c).begin());
    }
    return out;
}

namespace {

// stationary AR(1) chain of centered draws, then offset and floor per frame
FieldTrajectory ou_trajectory(const TorusGrid& grid, double horizon,
                              const RegularitySpec& spec, Rng& rng,
                              const CoefficientOptions& opt, int components) {
    FieldTrajectory traj;
    traj.grid = grid;
    traj.dt = opt.frame_dt;
    traj.t0 = 0.0;
    const int frames =
        static_cast<int>(std::ceil(horizon / opt.frame_dt - 1e-12)) + 1;
    const double rho = std::exp(-opt.frame_dt / opt.corr_time);
    const double fresh = std::sqrt(1.0 - rho * rho);

    Field state =
        synthesize_holder_field(grid, spec.alpha, spec.amplitude, rng,
                                components);
    for (int f = 0; f < frames; ++f) {
        if (f > 0) {
            Field innov = synthesize_holder_field(grid, spec.alpha,
                                                  spec.amplitude, rng,
                                                  components);
            Field next(grid, components);
            auto v = next.values_mut();
            auto s = state.values();
            auto g = innov.values();
            for (size_t i = 0; i < v.size(); ++i) {
                v[i] = rho * s[i] + fresh * g[i];
            }
            state = next;
        }
        Field frame = state;
        if (spec.mean_offset != 0.0 || spec.floor) {
            auto v = frame.values_mut();
            for (double& x : v) {
                x += spec.mean_offset;
                if (spec.floor && x < *spec.floor) x = *spec.floor;
            }
        }
        traj.frames.push_back(std::move(frame));
    }
    return traj;
}

FieldTrajectory zero_trajectory(const TorusGrid& grid, double horizon,
                                const CoefficientOptions& opt,
                                int components) {
    FieldTrajectory traj;
    traj.grid = grid;
    traj.dt = opt.frame_dt;
    traj.t0 = 0.0;
    const int frames =
        static_cast<int>(std::ceil(horizon / opt.frame_dt - 1e-12)) + 1;
    for (int f = 0; f < frames; ++f) {
        traj.frames.push_back(Field(grid, components));
    }
    return traj;
}

}  // namespace

double c_a_of(const FieldTrajectory& a_traj, bool a_zero) {
    if (a_zero) return std::numeric_limits<double>::infinity();
    double sup = -std::numeric_limits<double>::infinity();
    double inf = std::numeric_limits<double>::infinity();
    for (const Field& f : a_traj.frames) {
        sup = std::max(sup, f.max_value());
        inf = std::min(inf, f.min_value());
    }
    if (!(inf > 0.0)) {
        throw std::invalid_argument(
            "c_a_of: A must stay positive (set a floor > 0)");
    }
    const double m = std::max(sup, 1.0 / inf);
    return (1.0 + m) * (1.0 + m);
}

CoefficientSet make_coefficient_set(
    const TorusGrid& grid, double horizon, const RegularitySpec& spec_a,
    const RegularitySpec& spec_b, const RegularitySpec& spec_z2,
    const RegularitySpec& spec_z1, const RegularitySpec& spec_z0,
    const RegularitySpec& spec_tree, std::uint64_t seed,
    const CoefficientOptions& options) {
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("make_coefficient_set: horizon <= 0");
    }
    if (!options.a_zero) {
        if (!spec_a.floor || !(*spec_a.floor > 0.0)) {
            throw std::invalid_argument(
                "make_coefficient_set: spec_a needs a positive floor so the "
                "cubic coefficient cannot vanish");
        }
    }
    CoefficientSet set;
    set.grid = grid;
    set.frame_dt = options.frame_dt;
    set.horizon = horizon;
    set.seed = seed;
    set.a_zero = options.a_zero;

    // one independent stream per coefficient, all derived from the root
    Rng rng_a(derive_seed(seed, 1));
    Rng rng_b(derive_seed(seed, 2));
    Rng rng_z2(derive_seed(seed, 3));
    Rng rng_z1(derive_seed(seed, 4));
    Rng rng_z0(derive_seed(seed, 5));
    Rng rng_tree(derive_seed(seed, 6));

    set.a = options.a_zero
                ? zero_trajectory(grid, horizon, options, 1)
                : ou_trajectory(grid, horizon, spec_a, rng_a, options, 1);
    set.b = ou_trajectory(grid, horizon, spec_b, rng_b, options, grid.dim);
    set.z2 = ou_trajectory(grid, horizon, spec_z2, rng_z2, options, 1);
    set.z1 = ou_trajectory(grid, horizon, spec_z1, rng_z1, options, 1);
    set.z0 = ou_trajectory(grid, horizon, spec_z0, rng_z0, options, 1);

    FieldTrajectory g_traj =
        ou_trajectory(grid, horizon, spec_tree, rng_tree, options, 1);
    set.exp_tree = g_traj;
    for (Field& f : set.exp_tree.frames) {
        for (double& x : f.values_mut()) x = std::exp(3.0 * x);
    }

    set.c_a = c_a_of(set.a, set.a_zero);
    return set;
}

Field sample_noise_increment(NoiseStream& stream) {
    Field out(stream.grid, 1);
    const double scale = std::sqrt(stream.dt / stream.grid.cell_volume());
    for (double& x : out.values_mut()) {
        x = scale * stream.rng.gaussian();
    }
    stream.steps_drawn += 1;
    return out;
}

}  // namespace phi4lab
