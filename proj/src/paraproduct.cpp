#include "phi4lab/paraproduct.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "phi4lab/spectral.hpp"

namespace phi4lab {

namespace {

void accumulate_product(const Field& a, const Field& b, Field& into) {
    auto av = a.values();
    auto bv = b.values();
    auto ov = into.values_mut();
    for (size_t i = 0; i < ov.size(); ++i) ov[i] += av[i] * bv[i];
}

bool reciprocal_sums(double p1, double p2, double p) {
    const auto inv = [](double x) {
        return std::isinf(x) ? 0.0 : 1.0 / x;
    };
    return std::abs(inv(p1) + inv(p2) - inv(p)) <= 1e-12;
}

}  // namespace

BonyTriple bony_decompose(const Field& f, const Field& g) {
    if (f.grid() != g.grid()) {
        throw std::invalid_argument("bony_decompose: grid mismatch");
    }
    if (f.components() != 1 || g.components() != 1) {
        throw std::invalid_argument("bony_decompose: scalar fields only");
    }
    const std::vector<Field> bf = lp_blocks(f);
    const std::vector<Field> bg = lp_blocks(g);
    const int n = static_cast<int>(bf.size());

    // running partial sums: pf[m] = sum of f-blocks with index <= m
    std::vector<Field> pf, pg;
    pf.reserve(n);
    pg.reserve(n);
    pf.push_back(bf[0]);
    pg.push_back(bg[0]);
    for (int m = 1; m < n; ++m) {
        pf.push_back(pf[m - 1] + bf[m]);
        pg.push_back(pg[m - 1] + bg[m]);
    }

    BonyTriple out{Field(f.grid(), 1), Field(f.grid(), 1),
                   Field(f.grid(), 1)};
    // block index m holds dyadic level m - 1; pair order is preserved by
    // the shift, so the k <= l - 2 cut reads the same in index space
    for (int m = 2; m < n; ++m) {
        accumulate_product(pf[m - 2], bg[m], out.para_lo);
        accumulate_product(bf[m], pg[m - 2], out.para_hi);
    }
    for (int k = 0; k < n; ++k) {
        for (int l = std::max(0, k - 1); l <= std::min(n - 1, k + 1); ++l) {
            accumulate_product(bf[k], bg[l], out.resonant);
        }
    }
    return out;
}

double refined_rhs(double f_norm, double g_besov, double g_lp, double gamma,
                   int N) {
    if (gamma <= 0.0) throw std::domain_error("refined_rhs: gamma <= 0");
    if (N < 0) throw std::domain_error("refined_rhs: N < 0");
    if (f_norm < 0.0 || g_besov < 0.0 || g_lp < 0.0) {
        throw std::domain_error("refined_rhs: negative norm");
    }
    return f_norm * (std::exp2(-static_cast<double>(N) * gamma) * g_besov +
                     static_cast<double>(N) * g_lp);
}

ParaBound refined_para_bound(const Field& f, const Field& g, int N,
                             double gamma, double a1, double a2, double p1,
                             double q1, double p2, double q2, double p,
                             double q) {
    if (N < 0) throw std::domain_error("refined_para_bound: N < 0");
    if (gamma <= 0.0) {
        throw std::domain_error("refined_para_bound: gamma <= 0");
    }
    if (a1 < 0.0) throw std::domain_error("refined_para_bound: a1 < 0");
    if (!reciprocal_sums(p1, p2, p) || !reciprocal_sums(q1, q2, q)) {
        throw std::domain_error(
            "refined_para_bound: exponents are not a Holder triple");
    }
    const BonyTriple triple = bony_decompose(f, g);
    ParaBound out;
    out.lhs = besov_norm(triple.para_lo, a2 - gamma, p, q);
    out.rhs = refined_rhs(besov_norm(f, a1, p1, q1), besov_norm(g, a2, p2, q2),
                          g.lp_norm(p2), gamma, N);
    out.ratio = out.lhs / out.rhs;
    return out;
}

int optimize_window_N(double ell, double epsilon, double exponent_hi,
                      double exponent_lo) {
    if (!(ell >= 1.0)) throw std::domain_error("optimize_window_N: ell < 1");
    if (!(epsilon > 0.0) || epsilon > 0.25) {
        throw std::domain_error(
            "optimize_window_N: epsilon outside (0, 1/4]");
    }
    if (exponent_hi <= exponent_lo) return 0;
    const double raw =
        (exponent_hi - exponent_lo) * std::log2(ell) / epsilon;
    return static_cast<int>(std::ceil(raw - 1e-12));
}

}  // namespace phi4lab
