#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "phi4lab/coefficients.hpp"
#include "phi4lab/dynamics.hpp"
#include "phi4lab/field.hpp"

namespace phi4lab {

// The steering field ell * exp_tree (v - v_ell) / ||v - v_ell||_L2 that one
// solution adds to its noise channel to chase the other; identically zero
// once the L2 distance is within m_tol. Throws std::invalid_argument on
// shape mismatch or ell < 0.
Field coupling_drift(const Field& v, const Field& v_ell,
                     const Field& exp_tree, double ell, double m_tol);

// Everything the change of measure needs to be written down exactly:
// log_weight = -stochastic_integral - energy, with
//   stochastic_integral = ell * sum over drifted steps of <dhat, dW>_L2,
//   energy              = ell^2 * drifted_time / 2.
struct GirsanovLedger {
    double log_weight = 0.0;
    double stochastic_integral = 0.0;
    double energy = 0.0;
    double drifted_time = 0.0;
    int replica_id = 0;
};

// Timing of a coupled pair. Drift is active on the windows
//   [free_time + k (free_time + drift_time), ... + drift_time),
// k = 0 .. n_windows-1, with free common-noise evolution in between; the
// run ends when the last drift window closes. Both window lengths must be
// positive multiples of dt.
struct CouplingConfig {
    double ell = 1.0;
    double dt = 1e-3;
    double free_time = 1.0;
    double drift_time = 1.0;
    int n_windows = 1;
    double m_tol = 1e-8;
    std::uint64_t seed = 1;
    int frame_stride = 1;
    int max_halvings = 20;
    bool record_noise = false;  // keep every increment for ledger replay
    bool noiseless = false;     // zero noise: deterministic drift diagnostics
    int replica_id = 0;
};

// One realization of the pair (v, v_ell) on common noise. tau is the
// drift-clock coupling time free_time + drifted_time: the drift runs for
// exactly tau - free_time units of time, so the Girsanov energy is
// ell^2 (tau - free_time) / 2 identically. coupled_at is the wall-clock
// time of the merge (it exceeds tau whenever steps were skipped by the
// overshoot rule or earlier windows closed uncoupled); infinity when the
// pair never merged. After the merge v_ell's frames equal v's bitwise.
struct CouplingRun {
    FieldTrajectory v;
    FieldTrajectory v_ell;
    double ell = 0.0;
    double m_tol = 0.0;
    bool success = false;
    double tau = 0.0;
    double coupled_at = std::numeric_limits<double>::infinity();
    double drifted_time = 0.0;
    std::vector<double> l2_trace;  // ||v - v_ell||_L2 per recorded frame
    GirsanovLedger ledger;
    std::vector<char> coupled_by_window;  // merged by each window's close?
    std::vector<double> window_ends;      // absolute end time per window
    std::vector<Field> noise;             // per base step, when recorded
    bool noise_recorded = false;
    CouplingConfig config;
};

// Run the coupled pair: v from phi_v and v_ell from phi_v_ell, driven by
// the same noise stream, with v_ell's noise shifted by dt * coupling_drift
// during drift windows. Per drift step, in order:
//   - distance <= m_tol: the pair is declared merged at drift-clock time
//     tau = free_time + drifted_time and v_ell is frozen to v;
//   - the step's drift displacement would overshoot (dt ||drift||_L2 >=
//     distance): the step runs undrifted on common noise and v_ell snaps
//     to v at its end (no Girsanov contribution, tau as above);
//   - otherwise a full drifted step, accumulating the ledger.
// There is deliberately no partial drift: a fractional step would add a
// quadratic bite to the energy and break the exact identity above.
// Throws std::invalid_argument for ell <= 0, m_tol <= 0, shape mismatch,
// window lengths that are not positive multiples of dt, n_windows < 1, or
// coefficients not covering the run.
CouplingRun solve_coupled(const Field& phi_v, const Field& phi_v_ell,
                          const CoefficientSet& coeffs,
                          const CouplingConfig& ccfg);

// Rebuild the ledger of a finished run from its recorded noise and frames,
// replaying the per-step decisions. Bitwise-identical to the inline ledger.
// Throws std::logic_error when the run recorded no noise or was taken with
// frame_stride != 1.
GirsanovLedger girsanov_log_weight(const CouplingRun& run,
                                   const CoefficientSet& coeffs);

// Terms of (1/2) d/dt ||v - v_ell||_L2^2 with the step's coefficients
// frozen at time t, split by origin. The cubic term is <= 0 whatever the
// fields are; the drift term equals -ell <d, exp_tree dhat>_L2 and reduces
// to -ell ||d||_L2 when the tree weight is 1. All terms vanish when the
// fields already agree to within m_tol.
struct GapBreakdown {
    double a_term = 0.0;
    double b_term = 0.0;
    double z2_term = 0.0;
    double z1_term = 0.0;
    double drift_term = 0.0;
    double dissipation = 0.0;  // -||grad d||^2 - ||d||^2
    double total = 0.0;
    double distance = 0.0;  // ||v - v_ell||_L2
};
GapBreakdown monotonicity_gap(const Field& v, const Field& v_ell,
                              const CoefficientSet& coeffs, double t,
                              double ell, double m_tol = 1e-14);

// Merge statistics over replicas that differ only in their noise seed:
// fail_freq[k] is the fraction not yet merged when window k closes.
struct CouplingProbability {
    std::vector<double> fail_freq;
    std::vector<double> fail_se;  // binomial standard errors
    std::vector<double> window_ends;
    int replicas = 0;
    double ell = 0.0;
};
CouplingProbability coupling_probability(const Field& phi_v,
                                         const Field& phi_v_ell,
                                         const CoefficientSet& coeffs,
                                         const CouplingConfig& base,
                                         int replicas);

// Explicit surrogate enhancement: the three tree fields the transformed
// variable absorbs, plus the reference remainder scenarios start from.
struct JpSurrogates {
    Field tree1;
    Field tree2;
    Field tree3;
    Field v_ref;
};

// Reconstruction of the original field from the transformed one:
// jp_inverse(v) = tree1 - tree3 + exp(-3 tree2) * (v + v_ref), with
// jp_forward its exact algebraic inverse (recovers v from u). All four
// surrogate fields must share the input's grid; mismatches throw
// std::invalid_argument.
Field jp_inverse(const Field& v, const JpSurrogates& s);
Field jp_forward(const Field& u, const JpSurrogates& s);

// One replica's contribution to the transfer inequality.
struct HarnackSample {
    double weight = 1.0;     // Girsanov weight R
    double f_drifted = 0.0;  // f(u_ell(T)) under the drifted solution
    double f_plain = 0.0;    // f(u(T)) under the plain solution
    bool coupled = false;
};

// Empirical two-point inequality
//   (E[R f(u_ell)])^p1 <= E[f(u)^p1] * psi * (1 + ahat^{1/p1} f_sup psi)^p1
// with psi = E[R^{p1/(p1-1)}]^{p1-1} and ahat = max(P(not coupled),
// E[R 1_{not coupled}]) measured from the samples. Both sides carry
// standard errors from contiguous batching; holds is lhs <= rhs +
// 3 sqrt(se_lhs^2 + se_rhs^2). Throws std::invalid_argument for p1 <= 1,
// f_sup <= 0, fewer than 2 samples per batch, or a negative weight.
struct HarnackReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double se_lhs = 0.0;
    double se_rhs = 0.0;
    double psi_hat = 0.0;
    double a_hat = 0.0;
    double fail_freq = 0.0;
    double p1 = 0.0;
    double f_sup = 0.0;
    int batches = 0;
    bool holds = false;
};
HarnackReport harnack_check(std::span<const HarnackSample> samples,
                            double p1, double f_sup, int batches = 10);

}  // namespace phi4lab
