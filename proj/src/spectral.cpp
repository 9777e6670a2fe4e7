#include "phi4lab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "phi4lab/fft.hpp"

namespace phi4lab {
namespace {

// apply a radial spectral multiplier mult(|k|^2) to every component
Field apply_multiplier(const Field& f,
                       const std::function<double(double)>& mult) {
    const TorusGrid& g = f.grid();
    int total = g.total_points();
    Field out(g, f.components());
    for (int c = 0; c < f.components(); ++c) {
        std::vector<std::complex<double>> spec = f.spectrum(c);
        for (int i = 0; i < total; ++i) spec[i] *= mult(g.k_squared(i));
        auto vals = idft(g, spec);
        auto oc = out.component_mut(c);
        std::copy(vals.begin(), vals.end(), oc.begin());
    }
    return out;
}

// C-infinity monotone step: 0 for u <= 0, 1 for u >= 1
double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double a = std::exp(-1.0 / u);
    double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

constexpr double kChiFlat = 0.75;  // chi == 1 up to here
constexpr double kChiZero = 1.0;   // chi == 0 from here on

}  // namespace

double lp_window_chi(double r) {
    return smooth_step((kChiZero - r) / (kChiZero - kChiFlat));
}

double lp_window_phi(double r) {
    return lp_window_chi(0.5 * r) - lp_window_chi(r);
}

int lp_top_block(const TorusGrid& g) {
    // smallest j with 0.75 * 2^j > kmax has zero annulus; top = that - 1
    double kmax = max_wavenumber(g);
    int j = 0;
    while (kChiFlat * std::pow(2.0, j + 1) <= kmax) ++j;
    return j;
}

Field heat_semigroup(const Field& f, double t) {
    if (t < 0.0) throw std::domain_error("heat_semigroup needs t >= 0");
    if (t == 0.0) return f;
    return apply_multiplier(
        f, [t](double k2) { return std::exp(-t * (1.0 + k2)); });
}

Field gradient(const Field& f) {
    if (f.components() != 1)
        throw std::invalid_argument("gradient expects a scalar field");
    const TorusGrid& g = f.grid();
    int total = g.total_points();
    Field out(g, g.dim);
    const auto& spec = f.spectrum(0);
    std::vector<std::complex<double>> work(total);
    for (int d = 0; d < g.dim; ++d) {
        for (int i = 0; i < total; ++i) {
            auto c = g.site_coords(i);
            double k = g.wavenumber_of(c[d]);
            work[i] = spec[i] * std::complex<double>(0.0, k);
        }
        // Nyquist mode of d/dx has no real representative; zero it so the
        // gradient of a real field stays real
        for (int i = 0; i < total; ++i) {
            auto c = g.site_coords(i);
            if (c[d] == g.points_per_axis / 2) work[i] = 0.0;
        }
        auto vals = idft(g, work);
        auto oc = out.component_mut(d);
        std::copy(vals.begin(), vals.end(), oc.begin());
    }
    return out;
}

Field lp_block(const Field& f, int j) {
    if (j < -1) throw std::domain_error("lp_block index must be >= -1");
    if (j == -1)
        return apply_multiplier(
            f, [](double k2) { return lp_window_chi(std::sqrt(k2)); });
    double scale = std::pow(2.0, -j);
    return apply_multiplier(f, [scale](double k2) {
        return lp_window_phi(scale * std::sqrt(k2));
    });
}

std::vector<Field> lp_blocks(const Field& f) {
    const TorusGrid& g = f.grid();
    int top = lp_top_block(g);
    std::vector<Field> blocks;
    blocks.reserve(top + 2);
    for (int j = -1; j <= top; ++j) blocks.push_back(lp_block(f, j));
    return blocks;
}

namespace {
int dyadic_levels(const TorusGrid& g) { return lp_top_block(g) + 2; }
}  // namespace

double besov_norm_from_blocks(const std::vector<Field>& blocks,
                              const TorusGrid& grid, double alpha, double p,
                              double q) {
    if (p < 1.0 || q < 1.0)
        throw std::domain_error("besov_norm needs p, q in [1, inf]");
    double acc = 0.0;
    double sup = 0.0;
    for (size_t idx = 0; idx < blocks.size(); ++idx) {
        int j = static_cast<int>(idx) - 1;
        double w = j < 0 ? 1.0 : std::pow(2.0, j * alpha);
        double term = w * blocks[idx].lp_norm(p);
        if (std::isinf(q))
            sup = std::max(sup, term);
        else
            acc += std::pow(term, q);
    }
    return std::isinf(q) ? sup : std::pow(acc, 1.0 / q);
}

double besov_norm(const Field& f, double alpha, double p, double q) {
    if (dyadic_levels(f.grid()) < 3)
        throw std::domain_error("grid too coarse for a Besov norm");
    return besov_norm_from_blocks(lp_blocks(f), f.grid(), alpha, p, q);
}

}  // namespace phi4lab
