#pragma once

#include <vector>

#include "phi4lab/field.hpp"

namespace phi4lab {

// exp(t(Laplacian - 1)) applied spectrally: multiplier exp(-t(1 + |k|^2)).
// t = 0 returns f unchanged; t < 0 throws std::domain_error. Output of a
// nonnegative field may ring below zero by ~1e-10 * ||f||_inf (documented
// tolerance for the sharp spectral kernel).
Field heat_semigroup(const Field& f, double t);

// spectral gradient; returns a dim-component field
Field gradient(const Field& f);

// Dyadic frequency windows. chi is a smooth monotone cutoff, identically 1
// on [0, 3/4] and 0 from 1 on; the annular window phi(r) = chi(r/2) - chi(r)
// is supported on [3/4, 2]. Narrow by design: the low-frequency half of a
// paraproduct pair then stays two blocks away (see paraproduct module).
double lp_window_chi(double r);
double lp_window_phi(double r);

// number of dyadic levels j = -1, 0, ..., top_block(g) that can be nonzero
int lp_top_block(const TorusGrid& g);

// Littlewood-Paley block: j = -1 is the low bump chi(|k|), j >= 0 the
// annulus phi(2^-j |k|). j < -1 throws std::domain_error. Blocks above
// lp_top_block are identically zero.
Field lp_block(const Field& f, int j);

// all blocks -1..top in one spectral pass
std::vector<Field> lp_blocks(const Field& f);

// Besov norm (sum_j (w_j ||block_j||_Lp)^q)^(1/q) with w_j = 2^(j alpha) for
// j >= 0 and w_{-1} = 1, so the j = -1 term is alpha-independent. p, q in
// [1, inf]; pass INFINITY for the sup versions. Lp uses unnormalized
// Lebesgue measure on the torus. Requires >= 3 dyadic levels on the grid.
double besov_norm(const Field& f, double alpha, double p, double q);

// same but reusing precomputed blocks (several exponents, one block pass)
double besov_norm_from_blocks(const std::vector<Field>& blocks,
                              const TorusGrid& grid, double alpha, double p,
                              double q);

}  // namespace phi4lab
