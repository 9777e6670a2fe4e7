#include "phi4lab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phi4lab {

MeanVar mean_var(std::span<const double> xs) {
    MeanVar out;
    out.n = static_cast<long>(xs.size());
    if (out.n == 0) return out;
    double s = 0.0;
    for (double x : xs) s += x;
    out.mean = s / out.n;
    if (out.n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.var = ss / (out.n - 1);
        out.se = std::sqrt(out.var / out.n);
    }
    return out;
}

WilsonInterval wilson_interval(long successes, long trials, double z) {
    if (trials <= 0) throw std::domain_error("wilson_interval needs trials > 0");
    if (successes < 0 || successes > trials)
        throw std::domain_error("successes out of range");
    double n = static_cast<double>(trials);
    double p = successes / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = p + z2 / (2.0 * n);
    double margin = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return WilsonInterval{(center - margin) / denom, (center + margin) / denom};
}

LineFit least_squares_line(std::span<const double> x,
                           std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares_line needs >= 2 points");
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    for (size_t i = 0; i < x.size(); ++i) {
        double r = std::abs(y[i] - fit.slope * x[i] - fit.intercept);
        fit.max_abs_residual = std::max(fit.max_abs_residual, r);
    }
    return fit;
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty set");
    std::sort(xs.begin(), xs.end());
    size_t m = xs.size() / 2;
    return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

}  // namespace phi4lab
