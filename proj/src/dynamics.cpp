#include "phi4lab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "phi4lab/fft.hpp"
#include "phi4lab/spectral.hpp"

namespace phi4lab {

ExponentTable exponent_table(double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon <= 0.25)) {
        throw std::domain_error(
            "exponent_table: epsilon must lie in (0, 1/4]");
    }
    ExponentTable t;
    t.epsilon = epsilon;
    t.eps_dprime = (1.0 + epsilon) * (0.5 + epsilon) - 0.5;
    t.m_a = 1.0 / (epsilon * (0.5 - epsilon));
    t.m_b = 1.0 / (1.0 - epsilon * (0.5 - 2.0 * epsilon) - 3.0 * epsilon);
    t.m_z2 = 1.0 / (0.5 - t.eps_dprime);
    t.m_z1 = 1.0 / (1.5 - t.eps_dprime);
    t.m_z0 = 1.0 / (2.5 - t.eps_dprime);
    return t;
}

namespace {

// frozen per-step data: coefficient frames at t_n plus optional forcing
struct StepContext {
    const Field* a = nullptr;
    const Field* b = nullptr;
    const Field* z2 = nullptr;
    const Field* z1 = nullptr;
    const Field* z0 = nullptr;
    const Field* drift = nullptr;
    double a_sup = 0.0;
    bool a_zero = false;
    bool b_active = false;
};

// lazily built semigroup multipliers for dt / 2^depth
struct MultCache {
    const TorusGrid* grid = nullptr;
    double dt = 0.0;
    std::vector<std::vector<double>> levels;

    const std::vector<double>& level(int depth) {
        if (depth >= static_cast<int>(levels.size())) {
            levels.resize(depth + 1);
        }
        if (levels[depth].empty()) {
            const double step = dt / std::pow(2.0, depth);
            const int n = grid->total_points();
            levels[depth].resize(n);
            for (int i = 0; i < n; ++i) {
                levels[depth][i] =
                    std::exp(-step * (1.0 + grid->k_squared(i)));
            }
        }
        return levels[depth];
    }
};

Field apply_semigroup(const Field& f, const std::vector<double>& mult) {
    const auto& spec = f.spectrum();
    std::vector<std::complex<double>> scaled(spec.size());
    for (size_t i = 0; i < spec.size(); ++i) scaled[i] = mult[i] * spec[i];
    const std::vector<double> vals = idft(f.grid(), scaled);
    Field out(f.grid(), 1);
    std::copy(vals.begin(), vals.end(), out.values_mut().begin());
    return out;
}

Field rhs_of(const Field& v, const StepContext& ctx) {
    const TorusGrid& g = v.grid();
    const int n = g.total_points();
    Field out(g, 1);
    auto o = out.values_mut();
    if (ctx.b_active) {
        const Field grad = gradient(v);
        for (int d = 0; d < g.dim; ++d) {
            auto bd = ctx.b->component(d);
            auto gd = grad.component(d);
            for (int i = 0; i < n; ++i) o[i] += bd[i] * gd[i];
        }
    }
    auto vv = v.values();
    auto a = ctx.a->values();
    auto z2 = ctx.z2->values();
    auto z1 = ctx.z1->values();
    auto z0 = ctx.z0->values();
    for (int i = 0; i < n; ++i) {
        const double x = vv[i];
        double acc = o[i];
        if (!ctx.a_zero) acc -= a[i] * x * x * x;
        acc += z2[i] * x * x + z1[i] * x + z0[i];
        o[i] = acc;
    }
    if (ctx.drift) axpy(1.0, *ctx.drift, out);
    return out;
}

// one step of size dt_eff = dt / 2^depth, bisected while the explicit cubic
// increment is too stiff, re-checking after each half so only the early
// part of a decaying step pays for fine resolution
void advance(Field& v, double t, double dt_eff, int depth,
             const StepContext& ctx, const SolverConfig& cfg,
             MultCache& mults) {
    const double vmax = v.max_abs();
    const double load = dt_eff * ctx.a_sup * vmax * vmax;
    if (load <= 1.0 || depth >= cfg.max_halvings) {
        const Field rhs = rhs_of(v, ctx);
        axpy(dt_eff, rhs, v);
        v = apply_semigroup(v, mults.level(depth));
        if (!v.all_finite()) {
            throw BlowUpError(
                t, "solve_jp: non-finite frame (discrete blow-up) at t = " +
                       std::to_string(t));
        }
        return;
    }
    advance(v, t, dt_eff / 2.0, depth + 1, ctx, cfg, mults);
    advance(v, t + dt_eff / 2.0, dt_eff / 2.0, depth + 1, ctx, cfg, mults);
}

}  // namespace

struct JpStepper::Impl {
    const CoefficientSet* coeffs;
    SolverConfig cfg;
    MultCache mults;
};

JpStepper::JpStepper(const CoefficientSet& coeffs, const SolverConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
    if (!(cfg.dt > 0.0)) {
        throw std::invalid_argument("JpStepper: dt must be positive");
    }
    const double h = coeffs.grid.spacing();
    if (cfg.dt > 0.25 * h * h * (1.0 + 1e-12)) {
        throw std::invalid_argument(
            "JpStepper: dt exceeds the 0.25 h^2 stability guard");
    }
    if (coeffs.horizon < cfg.horizon - 1e-9) {
        throw std::invalid_argument(
            "JpStepper: coefficients do not cover the horizon");
    }
    impl_->coeffs = &coeffs;
    impl_->cfg = cfg;
    impl_->mults.grid = &coeffs.grid;
    impl_->mults.dt = cfg.dt;
}

JpStepper::~JpStepper() = default;
JpStepper::JpStepper(JpStepper&&) noexcept = default;
JpStepper& JpStepper::operator=(JpStepper&&) noexcept = default;

void JpStepper::step(Field& v, double t, const Field* extra) {
    const CoefficientSet& coeffs = *impl_->coeffs;
    StepContext ctx;
    ctx.a = &coeffs.a_at(t);
    ctx.b = &coeffs.b_at(t);
    ctx.z2 = &coeffs.z2_at(t);
    ctx.z1 = &coeffs.z1_at(t);
    ctx.z0 = &coeffs.z0_at(t);
    ctx.drift = extra;
    ctx.a_zero = coeffs.a_zero;
    ctx.a_sup = ctx.a_zero ? 0.0 : ctx.a->max_value();
    ctx.b_active = ctx.b->max_abs() > 0.0;
    advance(v, t, impl_->cfg.dt, 0, ctx, impl_->cfg, impl_->mults);
}

FieldTrajectory solve_jp(const Field& phi_prime, const CoefficientSet& coeffs,
                         const SolverConfig& cfg, const ExtraDrift& extra) {
    const TorusGrid& g = phi_prime.grid();
    if (!(g == coeffs.grid)) {
        throw std::invalid_argument("solve_jp: grid mismatch");
    }
    if (phi_prime.components() != 1) {
        throw std::invalid_argument("solve_jp: scalar initial data only");
    }
    if (!(cfg.dt > 0.0) || !(cfg.horizon > cfg.t0)) {
        throw std::invalid_argument("solve_jp: need dt > 0, horizon > t0");
    }
    const double h = g.spacing();
    if (cfg.dt > 0.25 * h * h * (1.0 + 1e-12)) {
        throw std::invalid_argument(
            "solve_jp: dt exceeds the 0.25 h^2 stability guard");
    }
    if (coeffs.horizon < cfg.horizon - 1e-9) {
        throw std::invalid_argument(
            "solve_jp: coefficients do not cover the horizon");
    }
    const double span = cfg.horizon - cfg.t0;
    const long steps = std::lround(span / cfg.dt);
    if (steps < 1 || std::abs(steps * cfg.dt - span) > 1e-6 * cfg.dt) {
        throw std::invalid_argument(
            "solve_jp: horizon - t0 must be a multiple of dt");
    }
    if (cfg.frame_stride < 1 || steps % cfg.frame_stride != 0) {
        throw std::invalid_argument(
            "solve_jp: frame_stride must divide the step count");
    }

    FieldTrajectory traj;
    traj.grid = g;
    traj.dt = cfg.dt * cfg.frame_stride;
    traj.t0 = cfg.t0;
    traj.frames.reserve(steps / cfg.frame_stride + 1);

    JpStepper stepper(coeffs, cfg);
    Field v = phi_prime;
    traj.frames.push_back(v);
    for (long n = 0; n < steps; ++n) {
        const double t = cfg.t0 + n * cfg.dt;
        if (extra) {
            const Field drift_store = extra(static_cast<int>(n), t);
            stepper.step(v, t, &drift_store);
        } else {
            stepper.step(v, t);
        }
        if ((n + 1) % cfg.frame_stride == 0) {
            traj.frames.push_back(v);
        }
    }
    return traj;
}

double max_principle_bound(double g_minus, double h_sup, double t) {
    if (!(g_minus > 0.0)) {
        throw std::domain_error("max_principle_bound: g_minus must be > 0");
    }
    if (!(h_sup >= 0.0)) {
        throw std::domain_error("max_principle_bound: h_sup must be >= 0");
    }
    if (!(t > 0.0) || !(t <= 1.0)) {
        throw std::domain_error("max_principle_bound: t must lie in (0, 1]");
    }
    return std::max(1.0 / std::sqrt(g_minus * t),
                    std::cbrt(h_sup / g_minus));
}

double coming_down_unit_rhs(double s, double min_a,
                            std::span<const double> tau_terms) {
    if (!(s > 0.0)) {
        throw std::domain_error("coming_down_unit_rhs: s must be > 0");
    }
    if (!(min_a >= 0.0)) {
        throw std::domain_error("coming_down_unit_rhs: min_a must be >= 0");
    }
    double rhs = (1.0 + 1.0 / std::sqrt(min_a)) / s;
    for (double term : tau_terms) rhs = std::max(rhs, term);
    return rhs;
}

namespace {

Field component_field(const Field& f, int c) {
    Field out(f.grid(), 1);
    auto src = f.component(c);
    std::copy(src.begin(), src.end(), out.values_mut().begin());
    return out;
}

// sup over frames (and components) of the Besov sup-sup norm at alpha
double sup_besov(const FieldTrajectory& traj, double alpha) {
    const double inf = std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (const Field& f : traj.frames) {
        if (f.components() == 1) {
            m = std::max(m, besov_norm(f, alpha, inf, inf));
        } else {
            for (int c = 0; c < f.components(); ++c) {
                m = std::max(m,
                             besov_norm(component_field(f, c), alpha, inf,
                                        inf));
            }
        }
    }
    return m;
}

}  // namespace

ComingDownReport coming_down_check(const std::vector<FieldTrajectory>& runs,
                                   const CoefficientSet& coeffs,
                                   const ExponentTable& exps,
                                   std::span<const double> s_grid,
                                   double c_cap) {
    if (runs.empty()) {
        throw std::invalid_argument("coming_down_check: no runs");
    }
    if (coeffs.a_zero) {
        throw std::invalid_argument(
            "coming_down_check: needs a strictly positive cubic "
            "coefficient");
    }
    ComingDownReport rep;
    rep.c_cap = c_cap;

    double min_a = std::numeric_limits<double>::infinity();
    for (const Field& f : coeffs.a.frames) {
        min_a = std::min(min_a, f.min_value());
    }
    rep.min_a = min_a;

    const double eps = exps.epsilon;
    rep.tau_norms[0] = sup_besov(coeffs.a, 1.0 - eps);
    rep.tau_norms[1] = sup_besov(coeffs.b, -eps);
    rep.tau_norms[2] = sup_besov(coeffs.z2, -0.5 - eps);
    rep.tau_norms[3] = sup_besov(coeffs.z1, -0.5 - eps);
    rep.tau_norms[4] = sup_besov(coeffs.z0, -0.5 - eps);
    const std::array<double, 5> ms{exps.m_a, exps.m_b, exps.m_z2, exps.m_z1,
                                   exps.m_z0};
    for (int i = 0; i < 5; ++i) {
        rep.tau_terms[i] = std::pow(coeffs.c_a * rep.tau_norms[i], ms[i]);
    }

    for (int r = 0; r < static_cast<int>(runs.size()); ++r) {
        const FieldTrajectory& run = runs[r];
        for (double s : s_grid) {
            double lhs = 0.0;
            for (int f = 0; f < run.frame_count(); ++f) {
                if (run.time_of(f) >= s * s - 1e-12) {
                    lhs = std::max(lhs, run.frames[f].max_abs());
                }
            }
            const double rhs = coming_down_unit_rhs(s, min_a, rep.tau_terms);
            ComingDownEntry e;
            e.run = r;
            e.s = s;
            e.lhs = lhs;
            e.rhs_unit = rhs;
            e.ratio = lhs / rhs;
            rep.fitted_c = std::max(rep.fitted_c, e.ratio);
            rep.entries.push_back(e);
        }
    }
    rep.fits = rep.fitted_c <= c_cap;

    // pairwise agreement at t = 1 (the forgetting diagnostic)
    for (size_t r = 0; r + 1 < runs.size(); ++r) {
        for (size_t q = r + 1; q < runs.size(); ++q) {
            const Field& vr = runs[r].at_time(1.0);
            const Field& vq = runs[q].at_time(1.0);
            const double scale =
                std::max({vr.max_abs(), vq.max_abs(), 1e-300});
            rep.merge_rel_at_1 = std::max(
                rep.merge_rel_at_1, (vr - vq).max_abs() / scale);
        }
    }
    return rep;
}

std::vector<double> shrink_schedule(
    const std::function<double(double)>& norm_fn, double s_start,
    double norm_floor) {
    if (!(s_start >= 0.0)) {
        throw std::domain_error("shrink_schedule: s_start must be >= 0");
    }
    std::vector<double> out{s_start};
    double s = s_start;
    if (s >= 0.5) return out;
    for (long iter = 0; iter < 1000000; ++iter) {
        const double norm = norm_fn(s);
        if (!(norm > 0.0)) {
            throw std::domain_error(
                "shrink_schedule: measured norm must be positive");
        }
        if (norm < norm_floor) return out;
        const double next = s + 4.0 / norm;
        if (next >= 0.5 - 1e-15) {
            out.push_back(0.5);
            return out;
        }
        out.push_back(next);
        s = next;
    }
    throw std::runtime_error(
        "shrink_schedule: did not reach 1/2 within 1e6 iterations");
}

double strong_norm_lambda0(double c_empty, double z2_norm, double v_norm,
                           double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon <= 0.25)) {
        throw std::domain_error(
            "strong_norm_lambda0: epsilon must lie in (0, 1/4]");
    }
    if (!(c_empty > 0.0) || !(z2_norm > 0.0) || !(v_norm > 0.0)) {
        throw std::domain_error(
            "strong_norm_lambda0: norms must be positive");
    }
    const double expo = -2.0 / (3.0 - 4.0 * epsilon);
    return std::min(c_empty, std::pow(z2_norm * v_norm, expo));
}

}  // namespace phi4lab
