#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "phi4lab/grid.hpp"

namespace phi4lab {

// Scalar or small-vector valued grid function. Treat as immutable once
// handed out of a constructor/operation; the in-place accessors exist for
// builders and invalidate the cached spectrum.
class Field {
  public:
    Field() = default;
    Field(const TorusGrid& grid, int components = 1);
    static Field constant(const TorusGrid& grid, double value,
                          int components = 1);

    const TorusGrid& grid() const { return grid_; }
    int components() const { return components_; }
    int size() const { return static_cast<int>(values_.size()); }

    std::span<const double> values() const { return values_; }
    std::span<double> values_mut();  // drops the spectrum cache
    std::span<const double> component(int c) const;
    std::span<double> component_mut(int c);

    double operator()(int site, int c = 0) const {
        return values_[static_cast<size_t>(c) * grid_.total_points() + site];
    }
    double& at(int site, int c = 0) {
        return values_mut()[static_cast<size_t>(c) * grid_.total_points() +
                            site];
    }

    // Fourier coefficients of one component, normalized so that the k = 0
    // entry is the spatial mean. Computed on first use, cached, safe for
    // concurrent readers.
    const std::vector<std::complex<double>>& spectrum(int c = 0) const;

    double max_abs() const;
    double min_value() const;
    double max_value() const;
    double mean() const;
    double l2_norm() const;  // sqrt(cell_volume * sum of squares), scalar only
    double lp_norm(double p) const;  // unnormalized Lebesgue measure

    bool all_finite() const;

  private:
    struct SpectrumCache;
    TorusGrid grid_{};
    int components_ = 1;
    std::vector<double> values_;
    mutable std::shared_ptr<SpectrumCache> cache_;
};

// pointwise lin-alg helpers used all over the solvers
Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
void axpy(double a, const Field& x, Field& y);  // y += a*x, same shape
double inner_l2(const Field& a, const Field& b);

// Time-indexed sequence of frames at uniform spacing dt starting at t0.
// All frames share the grid and component count.
struct FieldTrajectory {
    TorusGrid grid{};
    double dt = 0.0;
    double t0 = 0.0;
    std::vector<Field> frames;

    int frame_count() const { return static_cast<int>(frames.size()); }
    double time_of(int i) const { return t0 + i * dt; }
    double horizon() const {
        return frames.empty() ? t0 : time_of(frame_count() - 1);
    }
    // nearest frame, clamped to the stored range
    int frame_at(double t) const;
    const Field& at_time(double t) const { return frames[frame_at(t)]; }

    // throws std::invalid_argument if frames disagree in shape or dt <= 0
    void validate() const;
};

}  // namespace phi4lab
