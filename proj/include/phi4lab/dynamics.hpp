#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "phi4lab/coefficients.hpp"
#include "phi4lab/field.hpp"

namespace phi4lab {

// The five renormalization-strength exponents derived from epsilon, with
// eps_dprime defined through 1/2 + eps_dprime = (1+eps)(1/2+eps).
struct ExponentTable {
    double epsilon = 0.0;
    double eps_dprime = 0.0;
    double m_a = 0.0;
    double m_b = 0.0;
    double m_z2 = 0.0;
    double m_z1 = 0.0;
    double m_z0 = 0.0;
};

// throws std::domain_error unless 0 < epsilon <= 1/4
ExponentTable exponent_table(double epsilon);

struct SolverConfig {
    double dt = 1e-3;
    double horizon = 2.0;
    double t0 = 0.0;
    enum class Scheme { exponential_euler } scheme = Scheme::exponential_euler;
    double m_tol = 1e-8;    // absolute coupling tolerance
    std::uint64_t seed = 0;
    int frame_stride = 1;   // record every k-th step (must divide the count)
    int max_halvings = 20;  // adaptive depth cap for the explicit cubic step
};

// The discrete scheme can overflow where the continuum equation cannot;
// after max_halvings levels of dt reduction a non-finite frame raises this.
struct BlowUpError : std::runtime_error {
    double last_finite_time;
    explicit BlowUpError(double t, const std::string& what)
        : std::runtime_error(what), last_finite_time(t) {}
};

// optional per-step forcing, evaluated once per base step at t_n
using ExtraDrift = std::function<Field(int step, double t)>;

// Single-step driver sharing solve_jp's adaptive core. Couplers that must
// interleave two solutions on common noise step each through the same
// instance, so a drifted step equals a plain step with shifted forcing
// exactly (up to rounding), which is what makes the discrete change of
// measure an identity rather than an approximation.
class JpStepper {
  public:
    // validates the dt stability guard and horizon coverage
    JpStepper(const CoefficientSet& coeffs, const SolverConfig& cfg);
    ~JpStepper();
    JpStepper(JpStepper&&) noexcept;
    JpStepper& operator=(JpStepper&&) noexcept;

    // advance v by one base step starting at time t; extra, when non-null,
    // is added to the reaction terms, frozen over the step
    void step(Field& v, double t, const Field* extra = nullptr);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Exponential-Euler integration of
//   (d_t - Laplacian + 1) v = B . grad v - A v^3 + Z2 v^2 + Z1 v + Z0
// with frozen coefficients per step:
//   v_{n+1} = exp(dt (Laplacian - 1)) [v_n + dt (rhs(v_n) + extra(t_n))].
// Steps whose explicit cubic increment would be too large are bisected
// adaptively (re-checking after each half), at most cfg.max_halvings deep.
// Throws BlowUpError when a frame stops being finite anyway, and
// std::invalid_argument for config violations (dt above the 0.25 h^2
// stability guard, coefficients not covering the horizon, stride mismatch).
FieldTrajectory solve_jp(const Field& phi_prime, const CoefficientSet& coeffs,
                         const SolverConfig& cfg,
                         const ExtraDrift& extra = {});

// max((g_minus t)^(-1/2), (h_sup/g_minus)^(1/3)); the sup bound on [t, 1]
// for the cubic-damped equation with damping floor g_minus and forcing
// bound h_sup. Throws std::domain_error for g_minus <= 0, h_sup < 0, or t
// outside (0, 1].
double max_principle_bound(double g_minus, double h_sup, double t);

struct ComingDownEntry {
    int run = 0;
    double s = 0.0;
    double lhs = 0.0;       // sup |v| over D_s
    double rhs_unit = 0.0;  // bound with C = 1
    double ratio = 0.0;
};

struct ComingDownReport {
    std::vector<ComingDownEntry> entries;
    double fitted_c = 0.0;   // max ratio: the single C for the whole grid
    double c_cap = 0.0;
    bool fits = false;       // fitted_c <= c_cap
    double merge_rel_at_1 = 0.0;  // max pairwise relative sup gap at t = 1
    double min_a = 0.0;
    // sup-in-time seminorm of each coefficient at its declared exponent and
    // the resulting (c_a [tau])^{m_tau} terms, order A, B, Z2, Z1, Z0
    std::array<double, 5> tau_norms{};
    std::array<double, 5> tau_terms{};
};

// the bound's right-hand side with C = 1
double coming_down_unit_rhs(double s, double min_a,
                            std::span<const double> tau_terms);

// Checks sup_{D_s} |v| <= C max{(1 + min(A)^{-1/2})/s, (c_a [tau])^{m_tau}}
// with one constant C fitted across every run and s value; coefficient
// seminorms are measured as sup-in-time Besov sup-sup norms at exponent
// 1-eps for A, -eps for B, -1/2-eps for the Z's.
ComingDownReport coming_down_check(const std::vector<FieldTrajectory>& runs,
                                   const CoefficientSet& coeffs,
                                   const ExponentTable& exps,
                                   std::span<const double> s_grid,
                                   double c_cap = 100.0);

// The time recursion s_{n+1} = s_n + 4 / norm_fn(s_n), emitted from s_start
// until the next time would pass 1/2 (the last entry is clamped to 1/2) or
// the measured norm falls below norm_floor. Throws std::domain_error when
// norm_fn returns a non-positive value.
std::vector<double> shrink_schedule(
    const std::function<double(double)>& norm_fn, double s_start,
    double norm_floor = 1e-6);

// min(c_empty, (z2_norm * v_norm)^(-2/(3-4 eps))); throws std::domain_error
// on nonpositive inputs or epsilon outside (0, 1/4]
double strong_norm_lambda0(double c_empty, double z2_norm, double v_norm,
                           double epsilon);

}  // namespace phi4lab
