#pragma once

#include <array>
#include <functional>

#include "phi4lab/field.hpp"

namespace phi4lab {

struct SpacetimePoint {
    double t = 0.0;
    std::array<double, 3> x{};
};

// D_s = (s^2, T) x M. The time floor is s squared, not s.
struct ParabolicDomain {
    double s = 0.0;
    double horizon = 1.0;
};

// validates 0 <= s and s^2 < horizon
ParabolicDomain make_parabolic_domain(double s, double horizon);

// max(sqrt(|t1 - t2|), wrapped Euclidean distance of x1, x2)
double parabolic_distance(const TorusGrid& g, const SpacetimePoint& z1,
                          const SpacetimePoint& z2);

struct SeminormReport {
    double alpha = 0.0;
    ParabolicDomain domain;
    double value = 0.0;
    long pairs = 0;     // point pairs actually evaluated
    bool exact = false;  // true when every grid pair was enumerated
};

// Parabolic Holder seminorm of a scalar trajectory over D_s: supremum of
// |w(z) - w(z')| / d(z,z')^alpha over distinct grid points, where for
// alpha in (1,2) the increment is corrected by the spatial gradient at the
// base point (the time direction carries no first-order correction). Exact
// enumeration when the pair count fits the budget (capped at 1e6),
// otherwise stratified sampling with near-diagonal oversampling; the report
// says which. alpha must lie in (0,1) or (1,2).
SeminormReport holder_seminorm(const FieldTrajectory& w, double alpha,
                               const ParabolicDomain& dom,
                               long budget = 200000);

// sup |W(z', z)| / d(z',z)^gamma over pairs with 0 < d <= rho, points drawn
// from the trajectory's grid and frame times restricted to dom. rho must
// exceed the grid spacing.
double local_norm(
    const std::function<double(const SpacetimePoint&, const SpacetimePoint&)>&
        W,
    double gamma, double rho, const ParabolicDomain& dom,
    const FieldTrajectory& geometry, long budget = 200000);

struct MollifyResult {
    FieldTrajectory traj;
    bool applied = false;  // false: delta below 2 * spacing, returned as-is
};

// Smoothing at parabolic scale delta: convolution with a nonnegative
// product bump, spatial radius delta and temporal radius delta^2, weights
// renormalized per output point (boundary frames clip in time), so
// constants are preserved exactly and the operation is linear and
// positivity-preserving.
MollifyResult mollify(const FieldTrajectory& w, double delta);

struct CommutatorOptions {
    double alpha = -0.2;     // regularity assigned to f (negative)
    double beta = 0.6;       // regularity assigned to g, in (0,1)
    long budget = 200000;    // pair budget for [g]_beta
};

struct CommutatorReport {
    FieldTrajectory gap;     // (f g)_delta - f_delta * g
    double sup_gap = 0.0;
    double bound_holder = 0.0;  // delta^(alpha+beta) [f]_alpha [g]_beta
    double bound_sup = 0.0;     // delta^beta ||f||_inf [g]_beta
    double f_neg_norm = 0.0;
    double g_holder = 0.0;
    bool applied = false;
};

// Pointwise mollification commutator (f g)_delta - f_delta g together with
// the two bounds it is compared against. Both trajectories must share grid
// and frame layout.
CommutatorReport commutator_gap(const FieldTrajectory& f,
                                const FieldTrajectory& g, double delta,
                                const CommutatorOptions& opt = {});

// negative-exponent Holder norm of one frame, realized as the
// Besov sup-sup norm at that exponent
double negative_holder_norm(const Field& f, double alpha);

}  // namespace phi4lab
