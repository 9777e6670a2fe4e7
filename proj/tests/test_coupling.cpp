#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "phi4lab/coupling.hpp"
#include "phi4lab/rng.hpp"
#include "phi4lab/stats.hpp"

using namespace phi4lab;

namespace {

// constant-in-space environment with everything off except what's asked for
CoefficientSet plain_env(const TorusGrid& g, double horizon, double a,
                         double z1, double tree_offset,
                         bool a_zero = true) {
    RegularitySpec sa;
    sa.mean_offset = a;
    if (!a_zero) sa.floor = 0.5 * a;
    RegularitySpec sb;
    RegularitySpec s2;
    RegularitySpec s1;
    s1.mean_offset = z1;
    RegularitySpec s0;
    RegularitySpec st;
    st.mean_offset = tree_offset;
    CoefficientOptions opt;
    opt.a_zero = a_zero;
    return make_coefficient_set(g, horizon, sa, sb, s2, s1, s0, st, 7, opt);
}

CouplingConfig quiet_config(double ell, double free_t, double drift_t,
                            double dt = 1e-3) {
    CouplingConfig c;
    c.ell = ell;
    c.dt = dt;
    c.free_time = free_t;
    c.drift_time = drift_t;
    c.noiseless = true;
    return c;
}

}  // namespace

TEST_CASE("coupling drift examples") {
    const TorusGrid g = make_torus_grid(1, 8);
    const CoefficientSet env = plain_env(g, 1.0, 0, 0, 0.1);
    const Field& e = env.exp_tree_at(0.0);  // exp(3 * 0.1) everywhere
    const double root = std::sqrt(g.measure());

    const Field v = Field::constant(g, 2.0);
    const Field vl = Field::constant(g, 0.0);
    const Field drift = coupling_drift(v, vl, e, 2.0, 1e-8);
    const double expect = 2.0 * std::exp(0.3) / root;
    for (int i = 0; i < g.total_points(); ++i) {
        CHECK(drift(i) == doctest::Approx(expect).epsilon(1e-12));
    }

    // only the direction of the difference matters
    const Field v10 = Field::constant(g, 10.0);
    const Field drift10 = coupling_drift(v10, vl, e, 2.0, 1e-8);
    for (int i = 0; i < g.total_points(); ++i) {
        CHECK(drift10(i) == doctest::Approx(drift(i)).epsilon(1e-12));
    }

    // within tolerance the steering is off
    const Field none = coupling_drift(v, v, e, 2.0, 1e-8);
    CHECK(none.max_abs() == 0.0);

    CHECK_THROWS_AS(coupling_drift(v, vl, e, -1.0, 1e-8),
                    std::invalid_argument);
    CHECK_THROWS_AS(coupling_drift(v, vl, Field(g, 2), 1.0, 1e-8),
                    std::invalid_argument);
    const TorusGrid g32 = make_torus_grid(1, 32);
    CHECK_THROWS_AS(
        coupling_drift(v, Field::constant(g32, 0.0), e, 1.0, 1e-8),
        std::invalid_argument);
}

TEST_CASE("equal starts couple the moment the window opens") {
    const TorusGrid g = make_torus_grid(1, 8);
    const CoefficientSet env = plain_env(g, 1.0, 0, 0, 0);
    CouplingConfig c;
    c.ell = 1.0;
    c.dt = 1e-3;
    c.free_time = 0.5;
    c.drift_time = 0.5;
    c.seed = 42;
    const Field start = Field::constant(g, 0.3);
    const CouplingRun run = solve_coupled(start, start, env, c);

    CHECK(run.success);
    CHECK(run.tau == 0.5);  // free_time + no drifted time at all
    CHECK(run.coupled_at == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(run.drifted_time == 0.0);
    CHECK(run.ledger.stochastic_integral == 0.0);
    CHECK(run.ledger.energy == 0.0);
    CHECK(run.ledger.log_weight == 0.0);
    for (double x : run.l2_trace) CHECK(x == 0.0);
    const Field gap = run.v.frames.back() - run.v_ell.frames.back();
    CHECK(gap.max_abs() == 0.0);
    REQUIRE(run.coupled_by_window.size() == 1);
    CHECK(run.coupled_by_window[0] == 1);
    CHECK(run.window_ends[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant-difference pair follows the scalar contraction oracle") {
    const TorusGrid g = make_torus_grid(1, 8);
    const CoefficientSet env = plain_env(g, 2.0, 0, 0, 0);
    const CouplingConfig c = quiet_config(1.0, 1.0, 1.0);
    const CouplingRun run = solve_coupled(Field::constant(g, 1.0),
                                          Field::constant(g, 0.0), env, c);

    const double x0 = std::sqrt(g.measure());
    CHECK(run.l2_trace[0] == doctest::Approx(x0).epsilon(1e-12));
    CHECK(run.l2_trace.size() == static_cast<size_t>(run.v.frame_count()));

    // free phase: exact discrete decay of the k = 0 mode
    for (int k : {100, 500, 1000}) {
        CHECK(run.l2_trace[k] ==
              doctest::Approx(x0 * std::exp(-1e-3 * k)).epsilon(1e-10));
    }

    // drift phase: x_{n+1} = e^{-dt} (x_n - dt ell) until the merge
    double x = run.l2_trace[1000];
    for (int k = 1000; k + 1 < run.v.frame_count(); ++k) {
        x = std::exp(-1e-3) * (x - 1e-3);
        if (x <= 1e-3) break;  // overshoot region: the scheme snaps instead
        CHECK(run.l2_trace[k + 1] == doctest::Approx(x).epsilon(1e-8));
    }

    CHECK(run.success);
    const double t_star = std::log(x0 * std::exp(-1.0) + 1.0);
    CHECK(std::abs(run.tau - (1.0 + t_star)) < 5e-3);
    CHECK(run.coupled_at - run.tau == doctest::Approx(1e-3).epsilon(1e-6));
    CHECK(run.l2_trace.back() == 0.0);
    const Field gap = run.v.frames.back() - run.v_ell.frames.back();
    CHECK(gap.max_abs() == 0.0);

    // noiseless ledger: no stochastic part, the energy identity is exact
    CHECK(run.ledger.stochastic_integral == 0.0);
    CHECK(run.ledger.energy ==
          doctest::Approx(0.5 * (run.tau - 1.0)).epsilon(1e-12));
    CHECK(run.ledger.log_weight == -run.ledger.energy);
}

TEST_CASE("bad coupling configs are rejected") {
    const TorusGrid g = make_torus_grid(1, 8);
    const CoefficientSet env = plain_env(g, 1.0, 0, 0, 0);
    const Field a = Field::constant(g, 1.0);
    const Field b = Field::constant(g, 0.0);
    CouplingConfig c;
    c.dt = 1e-3;
    c.free_time = 0.1;
    c.drift_time = 0.1;

    CouplingConfig bad = c;
    bad.ell = 0.0;
    CHECK_THROWS_AS(solve_coupled(a, b, env, bad), std::invalid_argument);
    bad.ell = -1.0;
    CHECK_THROWS_AS(solve_coupled(a, b, env, bad), std::invalid_argument);

    bad = c;
    bad.m_tol = 0.0;
    CHECK_THROWS_AS(solve_coupled(a, b, env, bad), std::invalid_argument);

    bad = c;
    bad.free_time = 0.0005;
    CHECK_THROWS_AS(solve_coupled(a, b, env, bad), std::invalid_argument);

    bad = c;
    bad.drift_time = 0.0;
    CHECK_THROWS_AS(solve_coupled(a, b, env, bad), std::invalid_argument);

    bad = c;
    bad.n_windows = 0;
    CHECK_THROWS_AS(solve_coupled(a, b, env, bad), std::invalid_argument);

    bad = c;
    bad.frame_stride = 3;  // 200 steps, not divisible
    CHECK_THROWS_AS(solve_coupled(a, b, env, bad), std::invalid_argument);

    bad = c;  // coefficients cover only [0, 1]
    bad.n_windows = 6;
    CHECK_THROWS_AS(solve_coupled(a, b, env, bad), std::invalid_argument);

    const TorusGrid g32 = make_torus_grid(1, 32);
    CHECK_THROWS_AS(
        solve_coupled(a, Field::constant(g32, 0.0), env, c),
        std::invalid_argument);
}

TEST_CASE("girsanov weights average to one over the noise") {
    const TorusGrid g = make_torus_grid(1, 8);
    const CoefficientSet env = plain_env(g, 1.0, 0, 0, 0);
    CouplingConfig c;
    c.ell = 1.0;
    c.dt = 1e-3;
    c.free_time = 0.25;
    c.drift_time = 0.75;
    c.frame_stride = 250;
    const Field va = Field::constant(g, 0.3);
    const Field vb = Field::constant(g, 0.0);

    const int replicas = 200;
    std::vector<double> weights, squares, taus;
    for (int r = 0; r < replicas; ++r) {
        CouplingConfig cr = c;
        cr.seed = derive_seed(777, static_cast<std::uint64_t>(r) + 1);
        cr.replica_id = r;
        const CouplingRun run = solve_coupled(va, vb, env, cr);
        REQUIRE(run.success);
        CHECK(run.ledger.log_weight ==
              -run.ledger.stochastic_integral - run.ledger.energy);
        const double w = std::exp(run.ledger.log_weight);
        CHECK(w > 0.0);
        weights.push_back(w);
        squares.push_back(w * w);
        taus.push_back(run.tau);
    }

    // the difference field is deterministic up to rounding, so the merge
    // time is (nearly) common across replicas
    for (double t : taus) CHECK(std::abs(t - taus[0]) <= 2e-3);

    const MeanVar mw = mean_var(weights);
    CHECK(std::abs(mw.mean - 1.0) <= 3.0 * mw.se);
    CHECK(std::abs(mw.mean - 1.0) < 0.25);

    // second moment of the lognormal weight: exp(ell^2 * drifted time)
    const MeanVar ms = mean_var(squares);
    const double expect = std::exp(taus[0] - c.free_time);
    CHECK(std::abs(ms.mean - expect) <= 4.0 * ms.se);
}

TEST_CASE("replaying the records rebuilds the ledger bitwise") {
    const TorusGrid g = make_torus_grid(1, 8);
    const CoefficientSet env = plain_env(g, 1.0, 0, 0, 0);
    CouplingConfig c;
    c.ell = 1.0;
    c.dt = 1e-3;
    c.free_time = 0.25;
    c.drift_time = 0.75;
    c.seed = 99;
    c.record_noise = true;
    const CouplingRun run = solve_coupled(Field::constant(g, 0.3),
                                          Field::constant(g, 0.0), env, c);
    REQUIRE(run.success);
    REQUIRE(run.noise_recorded);

    const GirsanovLedger re = girsanov_log_weight(run, env);
    CHECK(re.stochastic_integral == run.ledger.stochastic_integral);
    CHECK(re.energy == run.ledger.energy);
    CHECK(re.drifted_time == run.ledger.drifted_time);
    CHECK(re.log_weight == run.ledger.log_weight);
    CHECK(re.replica_id == run.ledger.replica_id);

    CouplingConfig no_rec = c;
    no_rec.record_noise = false;
    const CouplingRun bare = solve_coupled(Field::constant(g, 0.3),
                                           Field::constant(g, 0.0), env,
                                           no_rec);
    CHECK_THROWS_AS(girsanov_log_weight(bare, env), std::logic_error);

    CouplingConfig strided = c;
    strided.frame_stride = 250;
    const CouplingRun coarse = solve_coupled(Field::constant(g, 0.3),
                                             Field::constant(g, 0.0), env,
                                             strided);
    CHECK_THROWS_AS(girsanov_log_weight(coarse, env), std::logic_error);
}

TEST_CASE("a drifted step is a plain step on shifted noise") {
    const TorusGrid g = make_torus_grid(1, 8);
    const CoefficientSet env = plain_env(g, 1.0, 0, 0, 0);
    CouplingConfig c;
    c.ell = 1.0;
    c.dt = 1e-3;
    c.free_time = 0.1;
    c.drift_time = 0.1;
    c.seed = 5;
    c.record_noise = true;
    const CouplingRun run = solve_coupled(Field::constant(g, 0.4),
                                          Field::constant(g, 0.0), env, c);

    const int n0 = 100;  // first drift step
    const Field d = run.v.frames[n0] - run.v_ell.frames[n0];
    const double dist = d.l2_norm();
    REQUIRE(dist > run.m_tol);
    Field shifted = run.noise[n0];
    axpy(c.dt * c.ell / dist, d, shifted);

    SolverConfig one;
    one.dt = c.dt;
    one.t0 = 0.1;
    one.horizon = 0.101;
    const Field& e = env.exp_tree_at(0.1);
    const auto forcing_from = [&](const Field& inc) {
        return [&g, &e, &inc, &c](int, double) {
            Field f(g, 1);
            auto fv = f.values_mut();
            auto ev = e.values();
            auto iv = inc.values();
            for (int i = 0; i < g.total_points(); ++i) {
                fv[i] = 1.0 / c.dt * ev[i] * iv[i];
            }
            return f;
        };
    };

    const FieldTrajectory drifted =
        solve_jp(run.v_ell.frames[n0], env, one, forcing_from(shifted));
    const Field gap_l = drifted.frames.back() - run.v_ell.frames[n0 + 1];
    CHECK(gap_l.max_abs() < 1e-12);

    const FieldTrajectory plain =
        solve_jp(run.v.frames[n0], env, one, forcing_from(run.noise[n0]));
    const Field gap_v = plain.frames.back() - run.v.frames[n0 + 1];
    CHECK(gap_v.max_abs() < 1e-12);
}

TEST_CASE("multi-window bookkeeping on a deterministic pair") {
    // ell = 5 cannot close the gap inside one 0.1 window but finishes in
    // the second; every window boundary is observable in the run
    const TorusGrid g = make_torus_grid(1, 8);
    const CoefficientSet env = plain_env(g, 1.0, 0, 0, 0);
    CouplingConfig c = quiet_config(5.0, 0.1, 0.1);
    c.n_windows = 2;
    const Field va = Field::constant(g, 0.3);
    const Field vb = Field::constant(g, 0.0);
    const CouplingRun run = solve_coupled(va, vb, env, c);

    REQUIRE(run.coupled_by_window.size() == 2);
    CHECK(run.coupled_by_window[0] == 0);
    CHECK(run.coupled_by_window[1] == 1);
    CHECK(run.window_ends[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(run.window_ends[1] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(run.success);

    // the merge spends the whole first window plus ~ln(1.0254)/1 of the
    // second drifting
    const double x1 = 0.3 * std::sqrt(g.measure()) * std::exp(-0.1);
    const double x2 = ((x1 + 5.0) * std::exp(-0.1) - 5.0) * std::exp(-0.1);
    const double t2 = std::log((x2 + 5.0) / 5.0);
    CHECK(std::abs(run.drifted_time - (0.1 + t2)) < 5e-3);
    CHECK(std::abs(run.coupled_at - (0.3 + t2)) < 5e-3);
    CHECK(run.tau == doctest::Approx(0.1 + run.drifted_time).epsilon(1e-12));

    const CouplingProbability prob =
        coupling_probability(va, vb, env, c, 3);
    REQUIRE(prob.fail_freq.size() == 2);
    CHECK(prob.fail_freq[0] == 1.0);
    CHECK(prob.fail_freq[1] == 0.0);
    CHECK(prob.fail_se[0] == 0.0);
    CHECK(prob.fail_se[1] == 0.0);
    CHECK(prob.replicas == 3);
    CHECK(prob.ell == 5.0);

    CHECK_THROWS_AS(coupling_probability(va, vb, env, c, 0),
                    std::invalid_argument);
}

TEST_CASE("surrogate reconstruction round trips") {
    const TorusGrid g = make_torus_grid(1, 32);
    Rng rng(31);
    JpSurrogates s;
    s.tree1 = synthesize_holder_field(g, 0.45, 1.0, rng);
    s.tree2 = synthesize_holder_field(g, 0.95, 0.4, rng);
    s.tree3 = synthesize_holder_field(g, 1.45, 1.0, rng);
    s.v_ref = synthesize_holder_field(g, 1.5, 0.5, rng);
    const Field v = synthesize_holder_field(g, 1.2, 1.0, rng);

    const Field u = jp_inverse(v, s);
    const Field back = jp_forward(u, s);
    CHECK((back - v).max_abs() < 1e-12);

    // zero surrogates degenerate to the identity
    JpSurrogates none;
    none.tree1 = Field(g, 1);
    none.tree2 = Field(g, 1);
    none.tree3 = Field(g, 1);
    none.v_ref = Field(g, 1);
    CHECK((jp_inverse(v, none) - v).max_abs() == 0.0);

    // constant second tree scales v + v_ref uniformly
    JpSurrogates scaled = s;
    scaled.tree2 = Field::constant(g, 0.2);
    const Field us = jp_inverse(v, scaled);
    Field expect = s.tree1 - s.tree3;
    axpy(std::exp(-0.6), v + s.v_ref, expect);
    CHECK((us - expect).max_abs() < 1e-12 * std::max(1.0, expect.max_abs()));

    const TorusGrid g8 = make_torus_grid(1, 8);
    CHECK_THROWS_AS(jp_inverse(Field::constant(g8, 1.0), s),
                    std::invalid_argument);
    CHECK_THROWS_AS(jp_forward(Field::constant(g8, 1.0), s),
                    std::invalid_argument);
}

TEST_CASE("gap breakdown: signs, isolation, and symmetry") {
    const TorusGrid g = make_torus_grid(1, 32);
    RegularitySpec sa;
    sa.alpha = 0.95;
    sa.amplitude = 0.2;
    sa.mean_offset = 1.0;
    sa.floor = 0.25;
    RegularitySpec sb;
    sb.alpha = 0.95;
    sb.amplitude = 0.3;
    RegularitySpec s2 = sb;
    RegularitySpec s1 = sb;
    RegularitySpec s0 = sb;
    RegularitySpec st;
    st.alpha = 1.5;
    st.amplitude = 0.1;
    st.mean_offset = 0.1;
    const CoefficientSet env =
        make_coefficient_set(g, 0.2, sa, sb, s2, s1, s0, st, 5, {});

    Rng rng(11);
    const Field v = synthesize_holder_field(g, 1.5, 1.0, rng);
    const Field vl = synthesize_holder_field(g, 1.5, 1.0, rng);

    const GapBreakdown gap = monotonicity_gap(v, vl, env, 0.0, 0.7);
    CHECK(gap.a_term < 0.0);
    CHECK(gap.distance == doctest::Approx((v - vl).l2_norm()).epsilon(1e-14));
    CHECK(gap.dissipation < 0.0);
    CHECK(gap.total == doctest::Approx(gap.a_term + gap.b_term + gap.z2_term +
                                       gap.z1_term + gap.drift_term +
                                       gap.dissipation)
                           .epsilon(1e-12));

    // every term is even under swapping the two solutions
    const GapBreakdown swp = monotonicity_gap(vl, v, env, 0.0, 0.7);
    CHECK(swp.a_term == doctest::Approx(gap.a_term).epsilon(1e-12));
    CHECK(swp.b_term == doctest::Approx(gap.b_term).epsilon(1e-12));
    CHECK(swp.z2_term == doctest::Approx(gap.z2_term).epsilon(1e-12));
    CHECK(swp.z1_term == doctest::Approx(gap.z1_term).epsilon(1e-12));
    CHECK(swp.drift_term == doctest::Approx(gap.drift_term).epsilon(1e-12));
    CHECK(swp.dissipation ==
          doctest::Approx(gap.dissipation).epsilon(1e-12));

    // with only the steering on, its term is exactly -ell ||d||
    const CoefficientSet off = plain_env(g, 1.0, 0, 0, 0);
    const GapBreakdown lone = monotonicity_gap(v, vl, off, 0.0, 0.7);
    CHECK(lone.a_term == 0.0);
    CHECK(lone.b_term == 0.0);
    CHECK(lone.z2_term == 0.0);
    CHECK(lone.z1_term == 0.0);
    CHECK(lone.drift_term ==
          doctest::Approx(-0.7 * lone.distance).epsilon(1e-12));
    CHECK(lone.total == doctest::Approx(lone.drift_term + lone.dissipation)
                            .epsilon(1e-12));

    // a constant Z1 contributes exactly z1 ||d||^2
    const CoefficientSet linear = plain_env(g, 1.0, 0, 1.4, 0);
    const GapBreakdown zl = monotonicity_gap(v, vl, linear, 0.0, 0.0);
    CHECK(zl.z1_term ==
          doctest::Approx(1.4 * zl.distance * zl.distance).epsilon(1e-10));
    CHECK(zl.drift_term == 0.0);

    const GapBreakdown same = monotonicity_gap(v, v, env, 0.0, 0.7);
    CHECK(same.distance == 0.0);
    CHECK(same.total == 0.0);
    CHECK(same.a_term == 0.0);

    CHECK_THROWS_AS(monotonicity_gap(v, vl, env, 0.0, -1.0),
                    std::invalid_argument);
}

TEST_CASE("harnack check arithmetic") {
    std::vector<HarnackSample> uniform(40, {1.0, 1.5, 1.5, true});
    const HarnackReport flat = harnack_check(uniform, 2.0, 2.0);
    CHECK(flat.lhs == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(flat.rhs == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(flat.psi_hat == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(flat.a_hat == 0.0);
    CHECK(flat.fail_freq == 0.0);
    CHECK(flat.se_lhs == 0.0);
    CHECK(flat.se_rhs == 0.0);
    CHECK(flat.holds);
    CHECK(flat.batches == 10);

    // one failed replica inflates only the right side
    std::vector<HarnackSample> one_fail = uniform;
    one_fail[7].coupled = false;
    const HarnackReport leak = harnack_check(one_fail, 2.0, 2.0);
    CHECK(leak.a_hat == doctest::Approx(1.0 / 40.0).epsilon(1e-12));
    CHECK(leak.fail_freq == doctest::Approx(1.0 / 40.0).epsilon(1e-12));
    CHECK(leak.lhs == doctest::Approx(flat.lhs).epsilon(1e-12));
    CHECK(leak.rhs > flat.rhs);
    CHECK(leak.holds);

    // the check is capable of failing: constant-weight counterexample
    std::vector<HarnackSample> broken(40, {3.0, 2.0, 1.0, true});
    const HarnackReport viol = harnack_check(broken, 2.0, 2.0);
    CHECK(viol.lhs == doctest::Approx(36.0).epsilon(1e-12));
    CHECK(viol.rhs == doctest::Approx(9.0).epsilon(1e-12));
    CHECK_FALSE(viol.holds);

    CHECK_THROWS_AS(harnack_check(uniform, 1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(harnack_check(uniform, 2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(harnack_check(uniform, 2.0, 2.0, 1),
                    std::invalid_argument);
    std::vector<HarnackSample> few(5, {1.0, 1.5, 1.5, true});
    CHECK_THROWS_AS(harnack_check(few, 2.0, 2.0), std::invalid_argument);
    std::vector<HarnackSample> neg = uniform;
    neg[0].weight = -0.5;
    CHECK_THROWS_AS(harnack_check(neg, 2.0, 2.0), std::invalid_argument);
}
