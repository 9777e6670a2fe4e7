#include "phi4lab/scenarios.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <stdexcept>

#include "phi4lab/coefficients.hpp"
#include "phi4lab/coupling.hpp"
#include "phi4lab/dynamics.hpp"
#include "phi4lab/paraproduct.hpp"
#include "phi4lab/rng.hpp"
#include "phi4lab/seminorms.hpp"
#include "phi4lab/spectral.hpp"
#include "phi4lab/stats.hpp"

namespace phi4lab {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::string out_path(const LabConfig& cfg, const std::string& file) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / file).string();
}

std::string csv_path(const LabConfig& cfg, ScenarioResult& res,
                     const std::string& file) {
    std::string p = out_path(cfg, file);
    res.artifacts.push_back(p);
    return p;
}

void add_criterion(ScenarioResult& res, const std::string& name,
                   double observed, double threshold, bool pass,
                   const std::string& note = "") {
    res.criteria.push_back({name, observed, threshold, pass, note});
}

void finish(const LabConfig& cfg, ScenarioResult& res,
            const std::vector<std::vector<std::pair<std::string, double>>>&
                rows = {}) {
    const std::string p = out_path(cfg, res.scenario + "-verdict.json");
    write_verdict(p, res.scenario, res.criteria, rows);
    res.artifacts.push_back(p);
}

// the random environment of the transformed equation, from config knobs
CoefficientSet generic_env(const LabConfig& cfg, const TorusGrid& g,
                           double horizon, std::uint64_t seed,
                           bool a_zero = false) {
    RegularitySpec a;
    a.alpha = 1.0 - cfg.epsilon;
    a.amplitude = cfg.a_amp;
    a.mean_offset = cfg.a_offset;
    a.floor = cfg.a_floor;
    RegularitySpec b;
    b.alpha = 1.0 - cfg.epsilon;
    b.amplitude = cfg.b_amp;
    RegularitySpec z2;
    z2.alpha = -cfg.eta;
    z2.amplitude = cfg.z2_amp;
    RegularitySpec z1 = z2;
    z1.amplitude = cfg.z1_amp;
    RegularitySpec z0 = z2;
    z0.amplitude = cfg.z0_amp;
    z0.mean_offset = cfg.z0_offset;
    RegularitySpec tr;
    tr.alpha = 1.5;
    tr.amplitude = cfg.tree_amp;
    tr.mean_offset = cfg.tree_offset;
    tr.floor = 0.0;  // keeps the noise weight exp(3 tree) >= 1
    CoefficientOptions opt;
    opt.a_zero = a_zero;
    return make_coefficient_set(g, horizon, a, b, z2, z1, z0, tr, seed, opt);
}

// cubic off, every coefficient zero, weight identically one
CoefficientSet linear_env(const TorusGrid& g, double horizon,
                          std::uint64_t seed) {
    RegularitySpec zero;
    CoefficientOptions opt;
    opt.a_zero = true;
    return make_coefficient_set(g, horizon, zero, zero, zero, zero, zero,
                                zero, seed, opt);
}

Field unit_l2(const Field& f) {
    const double n = f.l2_norm();
    if (!(n > 0.0)) throw std::runtime_error("unit_l2: zero field");
    return (1.0 / n) * f;
}

// 1 + amp * (shape scaled to sup 1): positive, mean about 1
Field bump_profile(const TorusGrid& g, Rng& rng, double amp) {
    const Field s = synthesize_holder_field(g, 1.5, 1.0, rng);
    const double m = std::max(s.max_abs(), 1e-12);
    Field out = Field::constant(g, 1.0);
    axpy(amp / m, s, out);
    return out;
}

// the same weighting the coupled stepper applies to noise increments
Field noise_forcing(const Field& e, const Field& dw, double dt) {
    Field f(e.grid(), 1);
    auto fv = f.values_mut();
    auto ev = e.values();
    auto wv = dw.values();
    for (size_t i = 0; i < fv.size(); ++i) {
        fv[i] = 1.0 / dt * ev[i] * wv[i];
    }
    return f;
}

// ---------------------------------------------------------------- bony

void scenario_paraproduct(const LabConfig& cfg, ScenarioResult& res) {
    CsvWriter csv(csv_path(cfg, res, "paraproduct-bench.csv"),
                  {"seed", "a1", "a2", "gamma", "N", "lhs", "rhs", "ratio",
                   "grid"});

    // exactness of the three-way split on the pinned 128-point circle
    const TorusGrid g128 = make_torus_grid(1, 128);
    double worst_rel = 0.0;
    for (int i = 0; i < 100; ++i) {
        Rng rng(derive_seed(cfg.seed, 1000 + i));
        const Field f = synthesize_holder_field(g128, 0.5, 1.0, rng);
        const Field h = synthesize_holder_field(g128, 1.0, 1.0, rng);
        const BonyTriple t = bony_decompose(f, h);
        Field sum = t.para_lo + t.para_hi;
        axpy(1.0, t.resonant, sum);
        Field exact(g128, 1);
        auto ev = exact.values_mut();
        auto fv = f.values();
        auto hv = h.values();
        for (size_t k = 0; k < ev.size(); ++k) ev[k] = fv[k] * hv[k];
        const double scale = std::max(1.0, exact.max_abs());
        worst_rel = std::max(worst_rel, (sum - exact).max_abs() / scale);
    }
    add_criterion(res, "bony-exactness", worst_rel, 1e-12,
                  worst_rel <= 1e-12, "100 random pairs, 128 points");

    // window-split bound: max fitted ratio on two grids plus the
    // N-selection trick across three decades of ell
    const double a1 = 0.5, a2 = 0.6, gamma = 0.2;
    double max_ratio[2] = {0.0, 0.0};
    const int sizes[2] = {64, 128};
    for (int gi = 0; gi < 2; ++gi) {
        const TorusGrid g = make_torus_grid(1, sizes[gi]);
        for (int i = 0; i < 100; ++i) {
            Rng rng(derive_seed(cfg.seed, 1100 + i));
            const Field f = synthesize_holder_field(g, a1, 1.0, rng);
            const Field h = synthesize_holder_field(g, a2, 1.0, rng);
            for (int N = 0; N <= 8; ++N) {
                const ParaBound pb =
                    refined_para_bound(f, h, N, gamma, a1, a2, kInf, kInf,
                                       kInf, kInf, kInf, kInf);
                max_ratio[gi] = std::max(max_ratio[gi], pb.ratio);
                if (i < 10) {
                    csv.row({CsvWriter::num(1100 + i), CsvWriter::num(a1),
                             CsvWriter::num(a2), CsvWriter::num(gamma),
                             CsvWriter::num(N), CsvWriter::num(pb.lhs),
                             CsvWriter::num(pb.rhs), CsvWriter::num(pb.ratio),
                             CsvWriter::num(sizes[gi])});
                }
            }
        }
    }
    const bool finite =
        std::isfinite(max_ratio[0]) && std::isfinite(max_ratio[1]);
    const double stability =
        std::max(max_ratio[1] / max_ratio[0], max_ratio[0] / max_ratio[1]);

    double trick_c = 0.0;
    for (int k = 4; k <= 10; ++k) {
        const double ell = std::exp2(k);
        const int N =
            optimize_window_N(ell, cfg.epsilon, 2.0 / 3.0, 1.0 / 3.0);
        const double combined =
            std::exp2(-N * cfg.epsilon) * std::pow(ell, 2.0 / 3.0) +
            N * std::cbrt(ell);
        trick_c = std::max(trick_c, combined / std::pow(ell, 1.0 / 3.0 + 0.2));
    }
    const bool pass = finite && stability <= 2.0 && trick_c <= cfg.c_cap;
    char note[160];
    std::snprintf(note, sizeof(note),
                  "max ratio %.4g (64 pts) vs %.4g (128 pts), refinement "
                  "drift %.3f <= 2; N-trick constant %.3g <= %.3g",
                  max_ratio[0], max_ratio[1], stability, trick_c, cfg.c_cap);
    add_criterion(res, "refined-paraproduct", trick_c, cfg.c_cap, pass, note);
    finish(cfg, res);
}

// ------------------------------------------------------------ seminorm

void scenario_seminorm(const LabConfig& cfg, ScenarioResult& res) {
    // semigroup composition and exact mean decay
    const TorusGrid g = make_torus_grid(1, 64);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        Rng rng(derive_seed(cfg.seed, 2000 + i));
        Field f = synthesize_holder_field(g, 1.0, 1.0, rng);
        axpy(0.7, Field::constant(g, 1.0), f);
        const double s = 0.1 + 0.5 * rng.uniform();
        const double t = 0.1 + 0.5 * rng.uniform();
        const Field two_step = heat_semigroup(heat_semigroup(f, s), t);
        const Field one_step = heat_semigroup(f, s + t);
        const double scale = std::max(1.0, f.max_abs());
        worst = std::max(worst, (two_step - one_step).max_abs() / scale);
        const double m0 = f.mean();
        const double mt = one_step.mean();
        worst = std::max(worst, std::abs(mt - std::exp(-(s + t)) * m0) /
                                    std::max(1.0, std::abs(m0)));
    }
    add_criterion(res, "semigroup-laws", worst, 1e-12, worst <= 1e-12,
                  "composition and k=0 decay, 50 fields");

    // smoothing gap must scale like delta^beta; deltas are exact multiples
    // of the spacing so every kernel is well resolved and unrounded
    CsvWriter csv(csv_path(cfg, res, "seminorm-mollifier.csv"),
                  {"beta", "seed", "delta", "gap", "slope"});
    const TorusGrid gm = make_torus_grid(1, 1024);
    const std::vector<double> deltas = {8 * gm.spacing(), 16 * gm.spacing(),
                                        32 * gm.spacing(), 64 * gm.spacing()};
    double slope_dev = 0.0;
    for (double beta : {0.3, 0.6}) {
        std::vector<double> slopes;
        for (int s = 0; s < 20; ++s) {
            Rng rng(derive_seed(cfg.seed, 2100 + (beta > 0.4 ? 100 : 0) + s));
            FieldTrajectory tr;
            tr.grid = gm;
            tr.dt = 0.1;
            tr.t0 = 0.0;
            tr.frames.push_back(synthesize_holder_field(gm, beta, 1.0, rng));
            std::vector<double> lx, ly;
            for (double d : deltas) {
                const MollifyResult mr = mollify(tr, d);
                if (!mr.applied) continue;
                const double gap =
                    (mr.traj.frames[0] - tr.frames[0]).max_abs();
                lx.push_back(std::log(d));
                ly.push_back(std::log(gap));
            }
            const LineFit fit = least_squares_line(lx, ly);
            slopes.push_back(fit.slope);
            for (size_t k = 0; k < lx.size(); ++k) {
                csv.row({CsvWriter::num(beta), CsvWriter::num(s),
                         CsvWriter::num(std::exp(lx[k])),
                         CsvWriter::num(std::exp(ly[k])),
                         CsvWriter::num(fit.slope)});
            }
        }
        slope_dev = std::max(slope_dev, std::abs(median(slopes) - beta));
    }
    add_criterion(res, "mollifier-exponent", slope_dev, 0.15,
                  slope_dev <= 0.15,
                  "median log-log slope vs beta in {0.3, 0.6}, 20 seeds");

    // informational: parabolic seminorms of a heat-flow trajectory
    Rng rh(derive_seed(cfg.seed, 2300));
    FieldTrajectory flow;
    flow.grid = g;
    flow.dt = 0.01;
    flow.t0 = 0.0;
    const Field f0 = synthesize_holder_field(g, 0.5, 1.0, rh);
    for (int n = 0; n <= 100; ++n) {
        flow.frames.push_back(heat_semigroup(f0, n * flow.dt));
    }
    CsvWriter scsv(csv_path(cfg, res, "seminorm-report.csv"),
                   {"alpha", "s", "T", "value", "pairs", "exact"});
    for (double alpha : {0.5, 1.5}) {
        for (double s : {0.1, 0.3, 0.5}) {
            const SeminormReport rep = holder_seminorm(
                flow, alpha, make_parabolic_domain(s, flow.horizon()));
            scsv.row({CsvWriter::num(alpha), CsvWriter::num(s),
                      CsvWriter::num(rep.domain.horizon),
                      CsvWriter::num(rep.value),
                      CsvWriter::num(static_cast<long long>(rep.pairs)),
                      CsvWriter::num(static_cast<int>(rep.exact))});
        }
    }
    finish(cfg, res);
}

// ------------------------------------------------------- max principle

void scenario_max_principle(const LabConfig& cfg, ScenarioResult& res) {
    const TorusGrid g = make_torus_grid(1, 64);
    const double dt = 1e-4;
    const std::vector<double> cuts = {0.1, 0.25, 0.5};
    CsvWriter csv(csv_path(cfg, res, "max-principle.csv"),
                  {"config", "t", "g_minus", "h_sup", "bound", "observed",
                   "margin"});
    std::vector<std::vector<std::pair<std::string, double>>> rows;

    double worst_ratio = 0.0;
    for (int i = 0; i < 50; ++i) {
        Rng rng(derive_seed(cfg.seed, 3000 + i));
        const double a_off = 0.6 + rng.uniform();
        const double h_amp = 0.5 + 1.5 * rng.uniform();
        const double v_amp = 5.0 + 45.0 * rng.uniform();

        RegularitySpec sa;
        sa.alpha = 1.0 - cfg.epsilon;
        sa.amplitude = 0.3;
        sa.mean_offset = a_off;
        sa.floor = 0.5 * a_off;
        RegularitySpec sb;
        sb.alpha = 1.0 - cfg.epsilon;
        sb.amplitude = 0.3;
        RegularitySpec off;
        RegularitySpec sh;
        sh.alpha = -cfg.eta;
        sh.amplitude = h_amp;
        const CoefficientSet env = make_coefficient_set(
            g, 1.0, sa, sb, off, off, sh, off,
            derive_seed(cfg.seed, 3500 + i), {});

        double g_minus = kInf, h_sup = 0.0;
        for (const Field& fr : env.a.frames) {
            g_minus = std::min(g_minus, fr.min_value());
        }
        for (const Field& fr : env.z0.frames) {
            h_sup = std::max(h_sup, fr.max_abs());
        }

        SolverConfig sc;
        sc.dt = dt;
        sc.horizon = 1.0;
        sc.frame_stride = 10;
        const Field v0 = synthesize_holder_field(g, 1.0, v_amp, rng);
        const FieldTrajectory run = solve_jp(v0, env, sc);

        for (double tcut : cuts) {
            double observed = 0.0;
            for (int n = 0; n < run.frame_count(); ++n) {
                if (run.time_of(n) < tcut - 1e-12) continue;
                observed = std::max(observed, run.frames[n].max_abs());
            }
            const double bound = max_principle_bound(g_minus, h_sup, tcut);
            worst_ratio = std::max(worst_ratio, observed / bound);
            csv.row({CsvWriter::num(i), CsvWriter::num(tcut),
                     CsvWriter::num(g_minus), CsvWriter::num(h_sup),
                     CsvWriter::num(bound), CsvWriter::num(observed),
                     CsvWriter::num(1.05 * bound - observed)});
            rows.push_back({{"config", static_cast<double>(i)},
                            {"t", tcut},
                            {"bound", bound},
                            {"observed", observed},
                            {"margin", 1.05 * bound - observed}});
        }
    }
    add_criterion(res, "max-principle", worst_ratio, 1.05,
                  worst_ratio <= 1.05,
                  "50 random environments, t in {0.1, 0.25, 0.5}");
    finish(cfg, res, rows);
}

// ----------------------------------------------------------- come-down

void scenario_come_down(const LabConfig& cfg, ScenarioResult& res) {
    const TorusGrid g = make_torus_grid(cfg.dim, cfg.points);
    const double horizon = 1.0;
    const CoefficientSet env =
        generic_env(cfg, g, horizon, derive_seed(cfg.seed, 4000));
    const ExponentTable exps = exponent_table(cfg.epsilon);

    // one noise realization shared by every start
    const int steps = static_cast<int>(std::lround(horizon / cfg.dt));
    NoiseStream ns(g, cfg.dt, derive_seed(cfg.seed, 4001));
    std::vector<Field> incs;
    incs.reserve(steps);
    for (int n = 0; n < steps; ++n) incs.push_back(sample_noise_increment(ns));
    const ExtraDrift forcing = [&env, &incs, &cfg](int n, double t) {
        return noise_forcing(env.exp_tree_at(t), incs[n], cfg.dt);
    };

    Rng shape_rng(derive_seed(cfg.seed, 4002));
    const Field profile = bump_profile(g, shape_rng, 0.2);
    SolverConfig sc;
    sc.dt = cfg.dt;
    sc.horizon = horizon;
    sc.frame_stride = 10;

    std::vector<FieldTrajectory> runs;
    for (double size : {1.0, 10.0, 100.0, 1000.0}) {
        runs.push_back(solve_jp(size * profile, env, sc, forcing));
    }

    const std::vector<double> s_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    const ComingDownReport rep =
        coming_down_check(runs, env, exps, s_grid, cfg.c_cap);

    CsvWriter csv(csv_path(cfg, res, "come-down.csv"),
                  {"s", "run_id", "lhs", "rhs", "ratio", "fitted_C"});
    for (const auto& e : rep.entries) {
        csv.row({CsvWriter::num(e.s), CsvWriter::num(e.run),
                 CsvWriter::num(e.lhs), CsvWriter::num(e.rhs_unit),
                 CsvWriter::num(e.ratio), CsvWriter::num(rep.fitted_c)});
    }

    const bool merged = rep.merge_rel_at_1 <= 1e-2;
    const bool pass = merged && rep.fits;
    char note[200];
    std::snprintf(note, sizeof(note),
                  "merge gap %.3g <= 1e-2; fitted C %.3g <= %.3g (the "
                  "environment term (c_a [A])^{m_A} >= 4^%g keeps the bound "
                  "slack at desk scale; the merge check carries the teeth)",
                  rep.merge_rel_at_1, rep.fitted_c, rep.c_cap, exps.m_a);
    add_criterion(res, "coming-down", rep.merge_rel_at_1, 1e-2, pass, note);

    // derived exponents: pinned values at 0.1 plus the chain identities
    const ExponentTable e01 = exponent_table(0.1);
    double dev = std::abs(e01.m_a - 25.0);
    dev = std::max(dev, std::abs(e01.m_b - 100.0 / 67.0));
    dev = std::max(dev, std::abs(e01.m_z0 - 50.0 / 117.0));
    for (int i = 1; i <= 25; ++i) {
        const double eps = i / 100.0;
        const ExponentTable et = exponent_table(eps);
        dev = std::max(dev, std::abs(1.0 / et.m_z1 - 1.0 / et.m_z2 - 1.0));
        dev = std::max(dev, std::abs(1.0 / et.m_z0 - 1.0 / et.m_z1 - 1.0));
        dev = std::max(
            dev, std::abs(et.eps_dprime -
                          ((1.0 + eps) * (0.5 + eps) - 0.5)));
    }
    add_criterion(res, "exponent-table", dev, 1e-9, dev <= 1e-9,
                  "pinned values at eps = 0.1 and chain identities on the "
                  "eps grid {0.01..0.25}");
    finish(cfg, res);
}

// -------------------------------------------------------------- couple

void contraction_part(const LabConfig& cfg, ScenarioResult& res) {
    const TorusGrid g = make_torus_grid(1, 64);
    const CoefficientSet env = linear_env(g, 2.0, derive_seed(cfg.seed, 5005));
    Rng ra(derive_seed(cfg.seed, 5000));
    Rng rb(derive_seed(cfg.seed, 5001));
    const Field wa = synthesize_holder_field(g, 1.2, 1.0, ra);
    const Field wb = synthesize_holder_field(g, 1.2, 1.0, rb);
    const double gap0 = (wa - wb).l2_norm();
    const Field va = (5.0 / gap0) * wa;
    const Field vb = (5.0 / gap0) * wb;

    CsvWriter csv(csv_path(cfg, res, "couple-contraction.csv"),
                  {"ell", "d1", "slope", "slope_bound", "tau", "tau_bound"});
    double worst_excess = -kInf;
    std::string detail;
    bool ok = true;
    for (size_t k = 0; k < cfg.ells.size(); ++k) {
        const double ell = cfg.ells[k];
        CouplingConfig cc;
        cc.ell = ell;
        cc.dt = cfg.dt;
        cc.free_time = 1.0;
        cc.drift_time = 1.0;
        cc.m_tol = cfg.m_tol;
        cc.seed = derive_seed(cfg.seed, 5010 + k);
        const CouplingRun run = solve_coupled(va, vb, env, cc);
        ok = ok && run.success;

        const int n1 = static_cast<int>(std::lround(1.0 / cfg.dt));
        const double d1 = run.l2_trace[n1];
        std::vector<double> ts, xs;
        for (size_t n = n1 + 1; n < run.l2_trace.size(); ++n) {
            if (run.l2_trace[n] <= 0.0) break;
            ts.push_back(static_cast<double>(n) * cfg.dt);
            xs.push_back(run.l2_trace[n]);
        }
        const LineFit fit = least_squares_line(ts, xs);
        const double slope_bound = -ell + 2.0 * cfg.dt * ell * ell;
        const double tau_bound = 1.0 + d1 / ell + 2.0 * cfg.dt;
        const double excess =
            std::max(fit.slope - slope_bound, run.tau - tau_bound);
        worst_excess = std::max(worst_excess, excess);
        ok = ok && excess <= 0.0;
        csv.row({CsvWriter::num(ell), CsvWriter::num(d1),
                 CsvWriter::num(fit.slope), CsvWriter::num(slope_bound),
                 CsvWriter::num(run.tau), CsvWriter::num(tau_bound)});
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%sell %g slope %.3f", k ? "; " : "",
                      ell, fit.slope);
        detail += buf;
    }
    add_criterion(res, "l2-contraction", worst_excess, 0.0, ok, detail);
}

void uniformity_part(const LabConfig& cfg, ScenarioResult& res) {
    const TorusGrid g = make_torus_grid(1, 64);
    const CoefficientSet env = linear_env(g, 2.0, derive_seed(cfg.seed, 5105));
    const int pairs = 20;

    // pilot pass: measure the free-phase gap of each pair
    std::vector<Field> phi_a, phi_b;
    std::vector<double> d1(pairs, 0.0);
    double d1_max = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const double scale = 0.5 * std::pow(10.0, 2.0 * i / (pairs - 1.0));
        Rng ra(derive_seed(cfg.seed, 5100 + 2 * i));
        Rng rb(derive_seed(cfg.seed, 5101 + 2 * i));
        phi_a.push_back(scale * unit_l2(synthesize_holder_field(g, 1.2, 1.0, ra)));
        phi_b.push_back(scale * unit_l2(synthesize_holder_field(g, 1.2, 1.0, rb)));
        CouplingConfig pc;
        pc.ell = 1.0;
        pc.dt = cfg.dt;
        pc.free_time = 1.0;
        pc.drift_time = 1.0;
        pc.m_tol = cfg.m_tol;
        pc.frame_stride = 250;
        pc.seed = derive_seed(cfg.seed, 5200 + i);
        const CouplingRun pilot = solve_coupled(phi_a[i], phi_b[i], env, pc);
        d1[i] = pilot.l2_trace[static_cast<size_t>(
            std::lround(1.0 / (cfg.dt * 250)))];
        d1_max = std::max(d1_max, d1[i]);
    }
    const double ell_star = 2.0 * d1_max;

    CsvWriter csv(csv_path(cfg, res, "couple-uniformity.csv"),
                  {"pair", "scale_decade", "d1", "ell", "successes",
                   "replicas", "wilson_lo"});
    double min_lo = 1.0;
    bool ok = true;
    for (int i = 0; i < pairs; ++i) {
        CouplingConfig mc;
        mc.ell = ell_star;
        mc.dt = cfg.dt;
        mc.free_time = 1.0;
        mc.drift_time = 1.0;
        mc.m_tol = cfg.m_tol;
        mc.frame_stride = static_cast<int>(std::lround(2.0 / cfg.dt));
        mc.seed = derive_seed(cfg.seed, 5300 + i);
        const CouplingProbability prob =
            coupling_probability(phi_a[i], phi_b[i], env, mc, cfg.replicas);
        const long fails =
            std::lround(prob.fail_freq[0] * cfg.replicas);
        const WilsonInterval wi =
            wilson_interval(cfg.replicas - fails, cfg.replicas);
        min_lo = std::min(min_lo, wi.lo);
        ok = ok && wi.lo > 0.95;
        csv.row({CsvWriter::num(i),
                 CsvWriter::num(2.0 * i / (pairs - 1.0)),
                 CsvWriter::num(d1[i]), CsvWriter::num(ell_star),
                 CsvWriter::num(static_cast<long long>(cfg.replicas - fails)),
                 CsvWriter::num(cfg.replicas), CsvWriter::num(wi.lo)});
    }

    // Retry decay: at a deliberately undersized ell in the nonlinear
    // environment, failure after n windows should decay like a product.
    // The offset forcing would close every gap deterministically, so this
    // study runs in the weakly damped regime where failure is live.
    LabConfig wcfg = cfg;
    wcfg.z0_offset = 0.0;
    const CoefficientSet wenv =
        generic_env(wcfg, g, 6.0, derive_seed(cfg.seed, 5400));
    Rng rwa(derive_seed(cfg.seed, 5401));
    Rng rwb(derive_seed(cfg.seed, 5402));
    const Field wa = 1.2 * unit_l2(synthesize_holder_field(g, 1.2, 1.0, rwa));
    const Field wb = 0.8 * unit_l2(synthesize_holder_field(g, 1.2, 1.0, rwb));

    double dbar = 0.0;
    for (int p = 0; p < 5; ++p) {
        CouplingConfig pc;
        pc.ell = 1.0;
        pc.dt = cfg.dt;
        pc.free_time = 1.0;
        pc.drift_time = 1.0;
        pc.m_tol = cfg.m_tol;
        pc.frame_stride = 250;
        pc.seed = derive_seed(cfg.seed, 5410 + p);
        const CouplingRun run = solve_coupled(wa, wb, wenv, pc);
        dbar += run.l2_trace[static_cast<size_t>(
                    std::lround(1.0 / (cfg.dt * 250)))] /
                5.0;
    }
    // The failure transition in ell is narrow; walk a dyadic ladder down
    // until failure saturates, then refine once between the rungs that
    // bracket 1/2 and keep the most informative rung.
    const auto probe = [&](double ell, std::uint64_t salt) {
        CouplingConfig lc;
        lc.ell = ell;
        lc.dt = cfg.dt;
        lc.free_time = 1.0;
        lc.drift_time = 1.0;
        lc.m_tol = cfg.m_tol;
        lc.frame_stride = static_cast<int>(std::lround(2.0 / cfg.dt));
        lc.seed = derive_seed(cfg.seed, salt);
        return coupling_probability(wa, wb, wenv, lc, 30).fail_freq[0];
    };
    struct Rung {
        double ell;
        double fail;
    };
    std::vector<Rung> rungs;
    for (int k = 0; k <= 9; ++k) {
        const double ell_k = std::exp2(2 - k) * dbar;
        rungs.push_back({ell_k, probe(ell_k, 5420 + k)});
        if (rungs.back().fail >= 0.95) break;
    }
    for (size_t i = 0; i + 1 < rungs.size(); ++i) {
        if (rungs[i].fail < 0.5 && rungs[i + 1].fail >= 0.5) {
            const double mid = std::sqrt(rungs[i].ell * rungs[i + 1].ell);
            rungs.push_back({mid, probe(mid, 5440)});
            break;
        }
    }
    double ell_sub = rungs.front().ell;
    double best = 2.0;
    for (const Rung& r : rungs) {
        if (std::abs(r.fail - 0.5) < best) {
            best = std::abs(r.fail - 0.5);
            ell_sub = r.ell;
        }
    }

    CouplingConfig wc;
    wc.ell = ell_sub;
    wc.dt = cfg.dt;
    wc.free_time = 1.0;
    wc.drift_time = 1.0;
    wc.n_windows = 3;
    wc.m_tol = cfg.m_tol;
    wc.frame_stride = static_cast<int>(std::lround(1.0 / cfg.dt));
    const std::uint64_t wbase = derive_seed(cfg.seed, 5450);
    CsvWriter rcsv(csv_path(cfg, res, "couple-replicas.csv"),
                   {"replica", "ell", "tau", "success", "log_weight",
                    "l2_at_1", "window"});
    std::array<long, 3> fail_counts{};
    for (int r = 0; r < cfg.replicas; ++r) {
        CouplingConfig rc = wc;
        rc.seed = derive_seed(wbase, static_cast<std::uint64_t>(r) + 1);
        rc.replica_id = r;
        const CouplingRun run = solve_coupled(wa, wb, wenv, rc);
        int window = 0;
        for (size_t k = 0; k < run.coupled_by_window.size(); ++k) {
            if (!run.coupled_by_window[k]) {
                ++fail_counts[k];
            } else if (window == 0) {
                window = static_cast<int>(k) + 1;
            }
        }
        rcsv.row({CsvWriter::num(r), CsvWriter::num(rc.ell),
                  CsvWriter::num(run.tau),
                  CsvWriter::num(static_cast<int>(run.success)),
                  CsvWriter::num(run.ledger.log_weight),
                  CsvWriter::num(run.l2_trace[1]), CsvWriter::num(window)});
    }
    const double reps = static_cast<double>(cfg.replicas);
    const auto freq = [&](int n) { return fail_counts[n - 1] / reps; };
    const auto se = [&](int n) {
        return std::sqrt(freq(n) * (1.0 - freq(n)) / reps);
    };
    const double f1 = freq(1);
    bool windows_ok = true;
    std::string wnote;
    for (int n = 1; n <= 3; ++n) {
        const double slack =
            3.0 * std::hypot(se(n), n * std::pow(f1, n - 1) * se(1));
        windows_ok = windows_ok && freq(n) <= std::pow(f1, n) + slack;
        char buf[64];
        std::snprintf(buf, sizeof(buf), " f%d=%.3f(vs %.3f)", n, freq(n),
                      std::pow(f1, n));
        wnote += buf;
    }

    char note[200];
    std::snprintf(note, sizeof(note),
                  "ell* = %.3g, min Wilson lower %.4f > 0.95; window ell "
                  "%.3g:%s",
                  ell_star, min_lo, ell_sub, wnote.c_str());
    add_criterion(res, "coupling-uniformity", min_lo, 0.95,
                  ok && windows_ok, note);
}

void monotonicity_part(const LabConfig& cfg, ScenarioResult& res) {
    const TorusGrid g = make_torus_grid(1, 64);
    const CoefficientSet env =
        generic_env(cfg, g, 0.25, derive_seed(cfg.seed, 5500));
    const std::vector<double> ells = {4.0, 8.0, 16.0, 32.0};
    const int seeds = 20;
    const double c1 = 2.7;  // size-hypothesis constant

    // shapes and size fractions drawn once, reused across the ell sweep
    struct Sample {
        Field s1, s2;
        double u1, u2;
    };
    std::vector<Sample> samples;
    for (int j = 0; j < seeds; ++j) {
        Rng rs(derive_seed(cfg.seed, 5510 + j));
        Sample smp{synthesize_holder_field(g, 1.5, 1.0, rs),
                   synthesize_holder_field(g, 1.5, 1.0, rs),
                   0.2 + 0.8 * rs.uniform(), 0.2 + 0.8 * rs.uniform()};
        smp.s1 = (1.0 / std::max(smp.s1.max_abs(), 1e-12)) * smp.s1;
        smp.s2 = (1.0 / std::max(smp.s2.max_abs(), 1e-12)) * smp.s2;
        samples.push_back(std::move(smp));
    }

    CsvWriter csv(csv_path(cfg, res, "couple-monotonicity.csv"),
                  {"ell", "seed", "dist", "a_term", "b_term", "z2_term",
                   "z1_term", "drift_term", "deficit"});
    std::vector<double> lx, ly;
    std::vector<std::vector<double>> slopes_full(ells.size());
    bool structure_ok = true;
    int size_violations = 0;
    for (size_t k = 0; k < ells.size(); ++k) {
        const double ell = ells[k];
        double worst = -kInf;
        for (int j = 0; j < seeds; ++j) {
            const Sample& smp = samples[j];
            const double size1 = 2.0 * std::cbrt(ell) * smp.u1;
            const double size2 = 2.0 * std::cbrt(ell) * smp.u2;
            Field v = Field::constant(g, size1);
            axpy(0.3 * size1, smp.s1, v);
            Field vp = Field::constant(g, size2);
            axpy(0.3 * size2, smp.s2, vp);
            if (std::max(v.max_abs(), vp.max_abs()) > c1 * std::cbrt(ell)) {
                ++size_violations;
                continue;
            }
            const GapBreakdown gap =
                monotonicity_gap(v, vp, env, 0.0, ell);
            structure_ok = structure_ok && gap.a_term <= 1e-12;
            structure_ok =
                structure_ok &&
                gap.drift_term <= -ell * gap.distance * (1.0 - 1e-9) + 1e-12;
            const double deficit =
                (gap.b_term + gap.z2_term + gap.z1_term) / gap.distance;
            worst = std::max(worst, deficit);
            slopes_full[k].push_back(
                (gap.total - gap.dissipation) / gap.distance);
            csv.row({CsvWriter::num(ell), CsvWriter::num(j),
                     CsvWriter::num(gap.distance), CsvWriter::num(gap.a_term),
                     CsvWriter::num(gap.b_term), CsvWriter::num(gap.z2_term),
                     CsvWriter::num(gap.z1_term),
                     CsvWriter::num(gap.drift_term),
                     CsvWriter::num(deficit)});
        }
        if (worst > 0.0) {
            lx.push_back(std::log(ell));
            ly.push_back(std::log(worst));
        }
    }

    bool ok = structure_ok && lx.size() == ells.size();
    double gamma_hat = 1.0, c_hat = 0.0, max_res = kInf;
    if (lx.size() == ells.size()) {
        const LineFit fit = least_squares_line(lx, ly);
        gamma_hat = fit.slope;
        c_hat = std::exp(fit.intercept);
        max_res = fit.max_abs_residual;
        ok = ok && gamma_hat < 1.0 && max_res <= std::log(2.0);
        // the fitted envelope, doubled, must cover every measured slope
        for (size_t k = 0; k < ells.size(); ++k) {
            for (double s : slopes_full[k]) {
                ok = ok && s <= -ells[k] +
                               2.0 * c_hat * std::pow(ells[k], gamma_hat) +
                               1e-9;
            }
        }
    }
    char note[200];
    std::snprintf(note, sizeof(note),
                  "deficit fit c=%.3g gamma=%.3f residual factor %.3f <= 2; "
                  "%d size-hypothesis violations excluded",
                  c_hat, gamma_hat, std::exp(max_res), size_violations);
    add_criterion(res, "monotonicity-regression", gamma_hat, 1.0, ok, note);
}

void scenario_couple(const LabConfig& cfg, ScenarioResult& res) {
    contraction_part(cfg, res);
    uniformity_part(cfg, res);
    monotonicity_part(cfg, res);
    finish(cfg, res);
}

// ------------------------------------------------------------ girsanov

void scenario_girsanov(const LabConfig& cfg, ScenarioResult& res) {
    const TorusGrid g = make_torus_grid(1, 32);
    const double dt = 1e-3;
    const double ell = 1.0;
    const int steps = 1000;  // the drift window (1, 2)
    const int replicas = 10000;
    Rng rd(derive_seed(cfg.seed, 6000));
    const Field dhat = unit_l2(synthesize_holder_field(g, 1.0, 1.0, rd));

    CsvWriter csv(csv_path(cfg, res, "girsanov.csv"),
                  {"replica", "stochastic_integral", "log_weight"});
    std::vector<double> ws, w2s;
    ws.reserve(replicas);
    w2s.reserve(replicas);
    for (int r = 0; r < replicas; ++r) {
        NoiseStream ns(g, dt, derive_seed(cfg.seed, 61000 + r));
        double si = 0.0;
        for (int n = 0; n < steps; ++n) {
            si += ell * inner_l2(dhat, sample_noise_increment(ns));
        }
        const double lw = -si - 0.5 * ell * ell * (steps * dt);
        ws.push_back(std::exp(lw));
        w2s.push_back(ws.back() * ws.back());
        csv.row({CsvWriter::num(r), CsvWriter::num(si), CsvWriter::num(lw)});
    }
    const MeanVar mw = mean_var(ws);
    const MeanVar m2 = mean_var(w2s);
    const double target2 = std::exp(ell * ell * 1.0);
    const double z1 = std::abs(mw.mean - 1.0) / mw.se;
    const double z2 = std::abs(m2.mean - target2) / m2.se;
    const double z = std::max(z1, z2);
    char note[160];
    std::snprintf(note, sizeof(note),
                  "mean R %.5f (z=%.2f), mean R^2 %.4f vs %.4f (z=%.2f), "
                  "10^4 replicas",
                  mw.mean, z1, m2.mean, target2, z2);
    add_criterion(res, "girsanov-normalization", z, 3.0, z <= 3.0, note);
    finish(cfg, res);
}

// ------------------------------------------------------------- harnack

void scenario_harnack(const LabConfig& cfg, ScenarioResult& res) {
    const TorusGrid g = make_torus_grid(1, 64);
    const int pairs = 10;
    const int replicas = 1000;
    const double p1 = 2.0, f_sup = 2.0;

    CsvWriter csv(csv_path(cfg, res, "harnack.csv"),
                  {"seed_pair", "p1", "lhs", "rhs", "psi_hat", "a_hat"});
    double worst_margin = -kInf;
    bool ok = true;
    for (int p = 0; p < pairs; ++p) {
        const CoefficientSet env =
            generic_env(cfg, g, 2.0, derive_seed(cfg.seed, 7100 + p));
        Rng rs(derive_seed(cfg.seed, 7000 + p));
        const Field phi1 = synthesize_holder_field(g, 1.2, 1.0, rs);
        const Field phi2 = synthesize_holder_field(g, 1.2, 1.0, rs);

        Rng rsur(derive_seed(cfg.seed, 7200 + p));
        JpSurrogates sur;
        sur.tree1 = synthesize_holder_field(g, 1.3, 0.3, rsur);
        sur.tree2 = synthesize_holder_field(g, 1.3, 0.15, rsur);
        sur.tree3 = synthesize_holder_field(g, 1.3, 0.3, rsur);
        sur.v_ref = synthesize_holder_field(g, 1.3, 0.3, rsur);

        Rng rf(derive_seed(cfg.seed, 7300 + p));
        const Field probe = unit_l2(synthesize_holder_field(g, 1.0, 1.0, rf));
        const double fw = 1.0 + rf.uniform();
        const double fb = rf.uniform() - 0.5;
        const auto fval = [&](const Field& u) {
            return 1.5 + 0.5 * std::tanh(fw * inner_l2(u, probe) + fb);
        };

        CouplingConfig pc;
        pc.ell = 1.0;
        pc.dt = cfg.dt;
        pc.free_time = 1.0;
        pc.drift_time = 1.0;
        pc.m_tol = cfg.m_tol;
        pc.frame_stride = 250;
        pc.seed = derive_seed(cfg.seed, 7400 + p);
        const CouplingRun pilot = solve_coupled(phi1, phi2, env, pc);
        const double d1 = pilot.l2_trace[static_cast<size_t>(
            std::lround(1.0 / (cfg.dt * 250)))];
        const double ell = std::max(1.0, 2.0 * d1);

        std::vector<HarnackSample> samples;
        samples.reserve(replicas);
        const std::uint64_t base = derive_seed(cfg.seed, 7500 + p);
        for (int r = 0; r < replicas; ++r) {
            CouplingConfig cc;
            cc.ell = ell;
            cc.dt = cfg.dt;
            cc.free_time = 1.0;
            cc.drift_time = 1.0;
            cc.m_tol = cfg.m_tol;
            cc.frame_stride = static_cast<int>(std::lround(2.0 / cfg.dt));
            cc.seed = derive_seed(base, static_cast<std::uint64_t>(r) + 1);
            cc.replica_id = r;
            const CouplingRun run = solve_coupled(phi1, phi2, env, cc);
            HarnackSample smp;
            smp.weight = std::exp(run.ledger.log_weight);
            smp.f_drifted = fval(jp_inverse(run.v_ell.frames.back(), sur));
            smp.f_plain = fval(jp_inverse(run.v.frames.back(), sur));
            smp.coupled = run.success;
            samples.push_back(smp);
        }
        const HarnackReport rep = harnack_check(samples, p1, f_sup, 10);
        const double margin =
            rep.lhs - (rep.rhs + 3.0 * std::hypot(rep.se_lhs, rep.se_rhs));
        worst_margin = std::max(worst_margin, margin);
        ok = ok && rep.holds;
        csv.row({CsvWriter::num(p), CsvWriter::num(p1),
                 CsvWriter::num(rep.lhs), CsvWriter::num(rep.rhs),
                 CsvWriter::num(rep.psi_hat), CsvWriter::num(rep.a_hat)});
    }
    add_criterion(res, "harnack", worst_margin, 0.0, ok,
                  "10 seed pairs, 10^3 replicas each, 3-SE comparison");
    finish(cfg, res);
}

// --------------------------------------------------------- strong-norm

void scenario_strong_norm(const LabConfig& cfg, ScenarioResult& res) {
    const TorusGrid g = make_torus_grid(1, 64);
    const CoefficientSet env =
        generic_env(cfg, g, 1.0, derive_seed(cfg.seed, 8000));
    const int steps = static_cast<int>(std::lround(1.0 / cfg.dt));
    NoiseStream ns(g, cfg.dt, derive_seed(cfg.seed, 8002));
    std::vector<Field> incs;
    for (int n = 0; n < steps; ++n) incs.push_back(sample_noise_increment(ns));
    const ExtraDrift forcing = [&env, &incs, &cfg](int n, double t) {
        return noise_forcing(env.exp_tree_at(t), incs[n], cfg.dt);
    };
    Rng shape_rng(derive_seed(cfg.seed, 8001));
    SolverConfig sc;
    sc.dt = cfg.dt;
    sc.horizon = 1.0;
    sc.frame_stride = 10;
    const FieldTrajectory run =
        solve_jp(100.0 * bump_profile(g, shape_rng, 0.2), env, sc, forcing);

    const auto norm_fn = [&run](double s) {
        double sup = 0.0;
        for (int n = 0; n < run.frame_count(); ++n) {
            if (run.time_of(n) < s * s) continue;
            sup = std::max(sup, run.frames[n].max_abs());
        }
        return sup;
    };
    const std::vector<double> sched = shrink_schedule(norm_fn, 0.05);
    CsvWriter csv(csv_path(cfg, res, "strong-norm-schedule.csv"),
                  {"k", "s", "norm"});
    for (size_t k = 0; k < sched.size(); ++k) {
        csv.row({CsvWriter::num(static_cast<long long>(k)),
                 CsvWriter::num(sched[k]), CsvWriter::num(norm_fn(sched[k]))});
    }
    const bool reaches = !sched.empty() && sched.back() == 0.5;
    add_criterion(res, "shrink-schedule-terminates",
                  static_cast<double>(sched.size()), 1e5,
                  reaches && sched.size() < 1e5,
                  "time recursion s + 4/norm(s) reaches 1/2");

    // closed-form checks of the threshold scale
    double dev = std::abs(strong_norm_lambda0(0.125, 4.0, 5.25, 0.1) -
                          std::pow(21.0, -2.0 / 2.6));
    dev = std::max(dev,
                   std::abs(strong_norm_lambda0(0.05, 0.1, 0.1, 0.1) - 0.05));
    const bool monotone =
        strong_norm_lambda0(0.125, 8.0, 5.25, 0.1) <
        strong_norm_lambda0(0.125, 4.0, 5.25, 0.1);
    add_criterion(res, "strong-norm-threshold", dev, 1e-12,
                  dev <= 1e-12 && monotone,
                  "inversion, cap, and monotonicity of the scale");
    finish(cfg, res);
}

using ScenarioFn = void (*)(const LabConfig&, ScenarioResult&);

const std::vector<std::pair<std::string, ScenarioFn>>& registry() {
    static const std::vector<std::pair<std::string, ScenarioFn>> reg = {
        {"come-down", scenario_come_down},
        {"max-principle", scenario_max_principle},
        {"couple", scenario_couple},
        {"girsanov", scenario_girsanov},
        {"harnack", scenario_harnack},
        {"paraproduct-bench", scenario_paraproduct},
        {"seminorm-bench", scenario_seminorm},
        {"strong-norm", scenario_strong_norm},
    };
    return reg;
}

}  // namespace

bool ScenarioResult::pass() const {
    for (const auto& c : criteria) {
        if (!c.pass) return false;
    }
    return true;
}

const VerdictEntry& ScenarioResult::criterion(const std::string& name) const {
    for (const auto& c : criteria) {
        if (c.criterion == name) return c;
    }
    throw std::out_of_range("no criterion named " + name);
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [n, fn] : registry()) out.push_back(n);
        return out;
    }();
    return names;
}

ScenarioResult run_scenario(const std::string& name, const LabConfig& cfg) {
    validate_config(cfg);
    for (const auto& [n, fn] : registry()) {
        if (n != name) continue;
        ScenarioResult res;
        res.scenario = name;
        const auto start = std::chrono::steady_clock::now();
        fn(cfg, res);
        res.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        return res;
    }
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

}  // namespace phi4lab
