#include "phi4lab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phi4lab/rng.hpp"
#include "phi4lab/spectral.hpp"
#include "phi4lab/stats.hpp"

namespace phi4lab {

namespace {

void require_scalar_pair(const Field& v, const Field& v_ell,
                         const TorusGrid& g, const char* who) {
    if (!(v.grid() == g) || !(v_ell.grid() == g)) {
        throw std::invalid_argument(std::string(who) + ": grid mismatch");
    }
    if (v.components() != 1 || v_ell.components() != 1) {
        throw std::invalid_argument(std::string(who) +
                                    ": scalar fields only");
    }
}

// s * (a .* b), pointwise over one component
Field scaled_hadamard(const Field& a, const Field& b, double s) {
    Field out(a.grid(), 1);
    auto o = out.values_mut();
    auto av = a.values();
    auto bv = b.values();
    for (size_t i = 0; i < o.size(); ++i) o[i] = s * av[i] * bv[i];
    return out;
}

struct WindowLayout {
    long steps_free = 0;
    long steps_drift = 0;
    long period = 0;
    long total = 0;
    double horizon = 0.0;
};

WindowLayout layout_of(const CouplingConfig& c) {
    if (!(c.dt > 0.0)) {
        throw std::invalid_argument("solve_coupled: dt must be positive");
    }
    if (c.n_windows < 1) {
        throw std::invalid_argument(
            "solve_coupled: need at least one drift window");
    }
    if (c.free_time < 0.0 || !(c.drift_time > 0.0)) {
        throw std::invalid_argument(
            "solve_coupled: free_time must be >= 0 and drift_time > 0");
    }
    WindowLayout w;
    w.steps_free = std::lround(c.free_time / c.dt);
    w.steps_drift = std::lround(c.drift_time / c.dt);
    if (std::abs(w.steps_free * c.dt - c.free_time) > 1e-6 * c.dt ||
        w.steps_drift < 1 ||
        std::abs(w.steps_drift * c.dt - c.drift_time) > 1e-6 * c.dt) {
        throw std::invalid_argument(
            "solve_coupled: window lengths must be multiples of dt");
    }
    w.period = w.steps_free + w.steps_drift;
    w.total = c.n_windows * w.period;
    w.horizon = static_cast<double>(w.total) * c.dt;
    return w;
}

}  // namespace

Field coupling_drift(const Field& v, const Field& v_ell,
                     const Field& exp_tree, double ell, double m_tol) {
    require_scalar_pair(v, v_ell, v.grid(), "coupling_drift");
    if (!(exp_tree.grid() == v.grid()) || exp_tree.components() != 1) {
        throw std::invalid_argument("coupling_drift: bad tree weight shape");
    }
    if (ell < 0.0) {
        throw std::invalid_argument("coupling_drift: ell must be >= 0");
    }
    const Field d = v - v_ell;
    const double dist = d.l2_norm();
    if (dist <= m_tol) return Field(v.grid(), 1);
    return scaled_hadamard(exp_tree, d, ell / dist);
}

CouplingRun solve_coupled(const Field& phi_v, const Field& phi_v_ell,
                          const CoefficientSet& coeffs,
                          const CouplingConfig& ccfg) {
    const TorusGrid& g = coeffs.grid;
    require_scalar_pair(phi_v, phi_v_ell, g, "solve_coupled");
    if (!(ccfg.ell > 0.0)) {
        throw std::invalid_argument("solve_coupled: ell must be positive");
    }
    if (!(ccfg.m_tol > 0.0)) {
        throw std::invalid_argument("solve_coupled: m_tol must be positive");
    }
    const WindowLayout w = layout_of(ccfg);
    if (ccfg.frame_stride < 1 || w.total % ccfg.frame_stride != 0) {
        throw std::invalid_argument(
            "solve_coupled: frame_stride must divide the step count");
    }

    SolverConfig scfg;
    scfg.dt = ccfg.dt;
    scfg.horizon = w.horizon;
    scfg.m_tol = ccfg.m_tol;
    scfg.seed = ccfg.seed;
    scfg.frame_stride = ccfg.frame_stride;
    scfg.max_halvings = ccfg.max_halvings;
    JpStepper stepper(coeffs, scfg);
    NoiseStream stream(g, ccfg.dt, ccfg.seed);

    CouplingRun run;
    run.ell = ccfg.ell;
    run.m_tol = ccfg.m_tol;
    run.config = ccfg;
    run.noise_recorded = ccfg.record_noise;
    run.ledger.replica_id = ccfg.replica_id;
    for (FieldTrajectory* traj : {&run.v, &run.v_ell}) {
        traj->grid = g;
        traj->dt = ccfg.dt * ccfg.frame_stride;
        traj->t0 = 0.0;
        traj->frames.reserve(w.total / ccfg.frame_stride + 1);
    }
    if (ccfg.record_noise) run.noise.reserve(w.total);

    Field v = phi_v;
    Field vl = phi_v_ell;
    run.v.frames.push_back(v);
    run.v_ell.frames.push_back(vl);
    run.l2_trace.push_back((v - vl).l2_norm());

    bool coupled = false;
    for (long n = 0; n < w.total; ++n) {
        const double t = static_cast<double>(n) * ccfg.dt;
        const Field dW =
            ccfg.noiseless ? Field(g, 1) : sample_noise_increment(stream);
        if (ccfg.record_noise) run.noise.push_back(dW);
        const Field& e = coeffs.exp_tree_at(t);
        const Field forcing = scaled_hadamard(e, dW, 1.0 / ccfg.dt);

        const bool in_window = (n % w.period) >= w.steps_free;
        bool snap = false;
        bool did_drift = false;
        Field forcing_l;
        if (in_window && !coupled) {
            const Field d = v - vl;
            const double dist = d.l2_norm();
            if (dist <= ccfg.m_tol) {
                coupled = true;
                run.coupled_at = t;
            } else {
                const Field drift =
                    coupling_drift(v, vl, e, ccfg.ell, ccfg.m_tol);
                if (ccfg.dt * drift.l2_norm() >= dist) {
                    // a full drifted step would overrun the target; run the
                    // step on common noise instead and merge at its end
                    snap = true;
                } else {
                    Field shifted = dW;
                    axpy(ccfg.dt * ccfg.ell / dist, d, shifted);
                    forcing_l = scaled_hadamard(e, shifted, 1.0 / ccfg.dt);
                    run.ledger.stochastic_integral +=
                        ccfg.ell * inner_l2(d, dW) / dist;
                    run.drifted_time += ccfg.dt;
                    did_drift = true;
                }
            }
        }

        stepper.step(v, t, &forcing);
        if (coupled) {
            vl = v;
        } else if (did_drift) {
            stepper.step(vl, t, &forcing_l);
        } else {
            stepper.step(vl, t, &forcing);
            if (snap) {
                vl = v;
                coupled = true;
                run.coupled_at = static_cast<double>(n + 1) * ccfg.dt;
            }
        }

        if ((n + 1) % ccfg.frame_stride == 0) {
            run.v.frames.push_back(v);
            run.v_ell.frames.push_back(vl);
            run.l2_trace.push_back((v - vl).l2_norm());
        }
        if ((n + 1) % w.period == 0) {
            run.coupled_by_window.push_back(coupled ? 1 : 0);
            run.window_ends.push_back(static_cast<double>(n + 1) * ccfg.dt);
        }
    }

    run.success = coupled;
    run.tau = ccfg.free_time + run.drifted_time;
    run.ledger.drifted_time = run.drifted_time;
    run.ledger.energy = 0.5 * ccfg.ell * ccfg.ell * run.drifted_time;
    run.ledger.log_weight =
        -run.ledger.stochastic_integral - run.ledger.energy;
    return run;
}

GirsanovLedger girsanov_log_weight(const CouplingRun& run,
                                   const CoefficientSet& coeffs) {
    if (!run.noise_recorded) {
        throw std::logic_error(
            "girsanov_log_weight: the run recorded no noise");
    }
    if (run.config.frame_stride != 1) {
        throw std::logic_error(
            "girsanov_log_weight: replay needs every frame (stride 1)");
    }
    const WindowLayout w = layout_of(run.config);
    if (static_cast<long>(run.noise.size()) != w.total ||
        run.v.frame_count() != w.total + 1 ||
        run.v_ell.frame_count() != w.total + 1) {
        throw std::logic_error("girsanov_log_weight: truncated record");
    }
    const CouplingConfig& c = run.config;
    GirsanovLedger led;
    led.replica_id = run.ledger.replica_id;
    bool coupled = false;
    for (long n = 0; n < w.total; ++n) {
        const bool in_window = (n % w.period) >= w.steps_free;
        if (!in_window || coupled) continue;
        const Field d = run.v.frames[n] - run.v_ell.frames[n];
        const double dist = d.l2_norm();
        if (dist <= c.m_tol) {
            coupled = true;
            continue;
        }
        const double t = static_cast<double>(n) * c.dt;
        const Field& e = coeffs.exp_tree_at(t);
        const Field drift = coupling_drift(run.v.frames[n],
                                           run.v_ell.frames[n], e, c.ell,
                                           c.m_tol);
        if (c.dt * drift.l2_norm() >= dist) {
            coupled = true;
            continue;
        }
        led.stochastic_integral += c.ell * inner_l2(d, run.noise[n]) / dist;
        led.drifted_time += c.dt;
    }
    led.energy = 0.5 * c.ell * c.ell * led.drifted_time;
    led.log_weight = -led.stochastic_integral - led.energy;
    return led;
}

GapBreakdown monotonicity_gap(const Field& v, const Field& v_ell,
                              const CoefficientSet& coeffs, double t,
                              double ell, double m_tol) {
    const TorusGrid& g = coeffs.grid;
    require_scalar_pair(v, v_ell, g, "monotonicity_gap");
    if (ell < 0.0) {
        throw std::invalid_argument("monotonicity_gap: ell must be >= 0");
    }
    GapBreakdown out;
    const Field d = v - v_ell;
    out.distance = d.l2_norm();
    if (out.distance <= m_tol) return out;

    const double cv = g.cell_volume();
    const int n = g.total_points();
    auto dv = d.values();
    auto vv = v.values();
    auto lv = v_ell.values();
    auto av = coeffs.a_at(t).values();
    auto z2v = coeffs.z2_at(t).values();
    auto z1v = coeffs.z1_at(t).values();
    auto ev = coeffs.exp_tree_at(t).values();
    double a_acc = 0.0, z2_acc = 0.0, z1_acc = 0.0, dr_acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double di = dv[i];
        const double x = vv[i];
        const double y = lv[i];
        if (!coeffs.a_zero) {
            a_acc += di * av[i] * (x * x * x - y * y * y);
        }
        z2_acc += di * z2v[i] * (x * x - y * y);
        z1_acc += di * z1v[i] * di;
        dr_acc += di * ev[i] * di;
    }
    out.a_term = -cv * a_acc;
    out.z2_term = cv * z2_acc;
    out.z1_term = cv * z1_acc;
    out.drift_term = -ell * cv * dr_acc / out.distance;

    const Field gd = gradient(d);
    const Field& b = coeffs.b_at(t);
    double b_acc = 0.0, grad2 = 0.0;
    for (int ax = 0; ax < g.dim; ++ax) {
        auto bc = b.component(ax);
        auto gc = gd.component(ax);
        for (int i = 0; i < n; ++i) {
            b_acc += dv[i] * bc[i] * gc[i];
            grad2 += gc[i] * gc[i];
        }
    }
    out.b_term = cv * b_acc;
    out.dissipation = -cv * grad2 - out.distance * out.distance;
    out.total = out.a_term + out.b_term + out.z2_term + out.z1_term +
                out.drift_term + out.dissipation;
    return out;
}

CouplingProbability coupling_probability(const Field& phi_v,
                                         const Field& phi_v_ell,
                                         const CoefficientSet& coeffs,
                                         const CouplingConfig& base,
                                         int replicas) {
    if (replicas < 1) {
        throw std::invalid_argument(
            "coupling_probability: need at least one replica");
    }
    CouplingProbability out;
    out.replicas = replicas;
    out.ell = base.ell;
    std::vector<long> fails;
    for (int r = 0; r < replicas; ++r) {
        CouplingConfig c = base;
        c.seed = derive_seed(base.seed, static_cast<std::uint64_t>(r) + 1);
        c.replica_id = r;
        c.record_noise = false;
        const CouplingRun run = solve_coupled(phi_v, phi_v_ell, coeffs, c);
        if (r == 0) {
            out.window_ends = run.window_ends;
            fails.assign(run.coupled_by_window.size(), 0);
        }
        for (size_t k = 0; k < fails.size(); ++k) {
            if (!run.coupled_by_window[k]) ++fails[k];
        }
    }
    for (long f : fails) {
        const double p = static_cast<double>(f) / replicas;
        out.fail_freq.push_back(p);
        out.fail_se.push_back(std::sqrt(p * (1.0 - p) / replicas));
    }
    return out;
}

namespace {

void require_surrogate_shapes(const Field& x, const JpSurrogates& s,
                              const char* who) {
    const TorusGrid& g = x.grid();
    for (const Field* f : {&s.tree1, &s.tree2, &s.tree3}) {
        if (!(f->grid() == g) || f->components() != 1) {
            throw std::invalid_argument(std::string(who) +
                                        ": surrogate shape mismatch");
        }
    }
    if (x.components() != 1) {
        throw std::invalid_argument(std::string(who) + ": scalar required");
    }
}

}  // namespace

Field jp_inverse(const Field& v, const JpSurrogates& s) {
    require_surrogate_shapes(v, s, "jp_inverse");
    Field u(v.grid(), 1);
    auto uv = u.values_mut();
    auto vv = v.values();
    auto t1 = s.tree1.values();
    auto t2 = s.tree2.values();
    auto t3 = s.tree3.values();
    auto vr = s.v_ref.values();
    for (size_t i = 0; i < uv.size(); ++i) {
        uv[i] = t1[i] - t3[i] + std::exp(-3.0 * t2[i]) * (vv[i] + vr[i]);
    }
    return u;
}

Field jp_forward(const Field& u, const JpSurrogates& s) {
    require_surrogate_shapes(u, s, "jp_forward");
    Field v(u.grid(), 1);
    auto vv = v.values_mut();
    auto uv = u.values();
    auto t1 = s.tree1.values();
    auto t2 = s.tree2.values();
    auto t3 = s.tree3.values();
    auto vr = s.v_ref.values();
    for (size_t i = 0; i < vv.size(); ++i) {
        vv[i] = std::exp(3.0 * t2[i]) * (uv[i] - t1[i] + t3[i]) - vr[i];
    }
    return v;
}

namespace {

struct HarnackSides {
    double lhs = 0.0;
    double rhs = 0.0;
    double psi = 0.0;
    double ahat = 0.0;
    double fail = 0.0;
};

HarnackSides harnack_sides(std::span<const HarnackSample> xs, long lo,
                           long hi, double p1, double f_sup) {
    double rf = 0.0, fq = 0.0, rq = 0.0, fail = 0.0, rfail = 0.0;
    const double q = p1 / (p1 - 1.0);
    for (long i = lo; i < hi; ++i) {
        const HarnackSample& s = xs[i];
        rf += s.weight * s.f_drifted;
        fq += std::pow(s.f_plain, p1);
        rq += std::pow(s.weight, q);
        if (!s.coupled) {
            fail += 1.0;
            rfail += s.weight;
        }
    }
    const double m = static_cast<double>(hi - lo);
    rf /= m;
    fq /= m;
    rq /= m;
    fail /= m;
    rfail /= m;
    HarnackSides out;
    out.psi = std::pow(rq, p1 - 1.0);
    out.fail = fail;
    out.ahat = std::max(fail, rfail);
    out.lhs = std::pow(rf, p1);
    out.rhs = fq * out.psi *
              std::pow(1.0 + std::pow(out.ahat, 1.0 / p1) * f_sup * out.psi,
                       p1);
    return out;
}

}  // namespace

HarnackReport harnack_check(std::span<const HarnackSample> samples,
                            double p1, double f_sup, int batches) {
    if (!(p1 > 1.0)) {
        throw std::invalid_argument("harnack_check: p1 must exceed 1");
    }
    if (!(f_sup > 0.0)) {
        throw std::invalid_argument("harnack_check: f_sup must be positive");
    }
    if (batches < 2) {
        throw std::invalid_argument("harnack_check: need >= 2 batches");
    }
    const long n = static_cast<long>(samples.size());
    if (n < 2L * batches) {
        throw std::invalid_argument(
            "harnack_check: need at least two samples per batch");
    }
    for (const HarnackSample& s : samples) {
        if (s.weight < 0.0 || s.f_drifted < 0.0 || s.f_plain < 0.0) {
            throw std::invalid_argument(
                "harnack_check: weights and values must be nonnegative");
        }
    }

    const HarnackSides full = harnack_sides(samples, 0, n, p1, f_sup);
    std::vector<double> lhs_b, rhs_b;
    for (int b = 0; b < batches; ++b) {
        const long lo = static_cast<long>(b) * n / batches;
        const long hi = static_cast<long>(b + 1) * n / batches;
        const HarnackSides side = harnack_sides(samples, lo, hi, p1, f_sup);
        lhs_b.push_back(side.lhs);
        rhs_b.push_back(side.rhs);
    }

    HarnackReport rep;
    rep.lhs = full.lhs;
    rep.rhs = full.rhs;
    rep.psi_hat = full.psi;
    rep.a_hat = full.ahat;
    rep.fail_freq = full.fail;
    rep.se_lhs = mean_var(lhs_b).se;
    rep.se_rhs = mean_var(rhs_b).se;
    rep.p1 = p1;
    rep.f_sup = f_sup;
    rep.batches = batches;
    rep.holds = rep.lhs <= rep.rhs + 3.0 * std::sqrt(rep.se_lhs * rep.se_lhs +
                                                     rep.se_rhs * rep.se_rhs);
    return rep;
}

}  // namespace phi4lab
