#pragma once

#include "phi4lab/field.hpp"

namespace phi4lab {

// Bony splitting of a pointwise product by dyadic block pairs (k, l):
// para_lo collects k <= l - 2 (f rides below g), para_hi collects
// l <= k - 2, resonant the diagonal band |k - l| <= 1. The three parts
// partition all pairs, so they reconstruct f * g exactly; each is built
// from explicit block sums, none by subtraction.
struct BonyTriple {
    Field para_lo;
    Field para_hi;
    Field resonant;
};

BonyTriple bony_decompose(const Field& f, const Field& g);

struct ParaBound {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  // lhs / rhs, the fitted-constant candidate
};

// rhs formula alone, from already-measured norms:
// f_norm * (2^(-N gamma) * g_besov + N * g_lp)
double refined_rhs(double f_norm, double g_besov, double g_lp, double gamma,
                   int N);

// Window-split paraproduct estimate. lhs is the Besov norm of para_lo at
// a2 - gamma with outer exponents (p, q); rhs pairs the f-norm at (a1, p1,
// q1) with the g-norm split at window N. The outer exponents must factor
// through the inner ones in the Holder sense: 1/p1 + 1/p2 = 1/p and
// 1/q1 + 1/q2 = 1/q (1/inf = 0); violations throw std::domain_error, as
// do gamma <= 0, a1 < 0, or N < 0.
ParaBound refined_para_bound(const Field& f, const Field& g, int N,
                             double gamma, double a1, double a2, double p1,
                             double q1, double p2, double q2, double p,
                             double q);

// smallest N with 2^(-N epsilon) * ell^exponent_hi <= ell^exponent_lo,
// i.e. ceil((exponent_hi - exponent_lo) * log2(ell) / epsilon); 0 when the
// exponents are already ordered. ell >= 1 and epsilon in (0, 1/4] or
// std::domain_error.
int optimize_window_N(double ell, double epsilon, double exponent_hi,
                      double exponent_lo);

}  // namespace phi4lab
