#pragma once

#include <complex>
#include <span>
#include <vector>

#include "phi4lab/grid.hpp"

namespace phi4lab {

// Forward DFT of one real component, normalized by 1/N so the k = 0 entry is
// the mean: out[m] = (1/N) sum_x f(x) exp(-i k_m . x).
std::vector<std::complex<double>> dft(const TorusGrid& g,
                                      std::span<const double> values);

// Inverse of dft(): f(x) = sum_m c[m] exp(+i k_m . x). Imaginary residue is
// discarded (inputs are expected Hermitian-symmetric).
std::vector<double> idft(const TorusGrid& g,
                         std::span<const std::complex<double>> coeffs);

}  // namespace phi4lab
