#pragma once

#include <span>
#include <vector>

namespace phi4lab {

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;  // unbiased sample variance
    double se = 0.0;   // standard error of the mean
    long n = 0;
};
MeanVar mean_var(std::span<const double> xs);

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};
// Wilson score interval for a binomial proportion, z = 1.96 for 95%
WilsonInterval wilson_interval(long successes, long trials, double z = 1.96);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_abs_residual = 0.0;
};
LineFit least_squares_line(std::span<const double> x,
                           std::span<const double> y);

double median(std::vector<double> xs);  // by value: sorts a copy

}  // namespace phi4lab
