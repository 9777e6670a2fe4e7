#include "phi4lab/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phi4lab/fft.hpp"

namespace phi4lab {

struct Field::SpectrumCache {
    std::mutex mutex;
    std::vector<std::vector<std::complex<double>>> per_component;
};

Field::Field(const TorusGrid& grid, int components)
    : grid_(grid), components_(components) {
    if (components < 1) throw std::invalid_argument("components must be >= 1");
    values_.assign(static_cast<size_t>(grid.total_points()) * components, 0.0);
    cache_ = std::make_shared<SpectrumCache>();
    cache_->per_component.resize(components);
}

Field Field::constant(const TorusGrid& grid, double value, int components) {
    Field f(grid, components);
    std::fill(f.values_.begin(), f.values_.end(), value);
    return f;
}

std::span<double> Field::values_mut() {
    // fresh box, never touch one shared with copies of this field
    cache_ = std::make_shared<SpectrumCache>();
    cache_->per_component.resize(components_);
    return values_;
}

std::span<const double> Field::component(int c) const {
    if (c < 0 || c >= components_)
        throw std::out_of_range("field component out of range");
    size_t n = grid_.total_points();
    return std::span<const double>(values_).subspan(c * n, n);
}

std::span<double> Field::component_mut(int c) {
    if (c < 0 || c >= components_)
        throw std::out_of_range("field component out of range");
    cache_ = std::make_shared<SpectrumCache>();
    cache_->per_component.resize(components_);
    size_t n = grid_.total_points();
    return std::span<double>(values_).subspan(c * n, n);
}

const std::vector<std::complex<double>>& Field::spectrum(int c) const {
    if (c < 0 || c >= components_)
        throw std::out_of_range("field component out of range");
    if (!cache_) throw std::logic_error("spectrum of a default-made field");
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto& slot = cache_->per_component[c];
    if (slot.empty()) slot = dft(grid_, component(c));
    return slot;
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Field::min_value() const {
    double m = values_.empty() ? 0.0 : values_[0];
    for (double v : values_) m = std::min(m, v);
    return m;
}

double Field::max_value() const {
    double m = values_.empty() ? 0.0 : values_[0];
    for (double v : values_) m = std::max(m, v);
    return m;
}

double Field::mean() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return values_.empty() ? 0.0 : s / values_.size();
}

double Field::l2_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(grid_.cell_volume() * s);
}

double Field::lp_norm(double p) const {
    if (std::isinf(p)) return max_abs();
    if (p < 1.0) throw std::domain_error("lp_norm requires p >= 1");
    double s = 0.0;
    for (double v : values_) s += std::pow(std::abs(v), p);
    return std::pow(grid_.cell_volume() * s, 1.0 / p);
}

bool Field::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {
void check_same_shape(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid()) || a.components() != b.components())
        throw std::invalid_argument("field shape mismatch");
}
}  // namespace

Field operator+(const Field& a, const Field& b) {
    check_same_shape(a, b);
    Field out = a;
    auto o = out.values_mut();
    auto bv = b.values();
    for (size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
    return out;
}

Field operator-(const Field& a, const Field& b) {
    check_same_shape(a, b);
    Field out = a;
    auto o = out.values_mut();
    auto bv = b.values();
    for (size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
    return out;
}

Field operator*(double s, const Field& a) {
    Field out = a;
    for (auto& v : out.values_mut()) v *= s;
    return out;
}

void axpy(double a, const Field& x, Field& y) {
    check_same_shape(x, y);
    auto yv = y.values_mut();
    auto xv = x.values();
    for (size_t i = 0; i < yv.size(); ++i) yv[i] += a * xv[i];
}

double inner_l2(const Field& a, const Field& b) {
    check_same_shape(a, b);
    auto av = a.values();
    auto bv = b.values();
    double s = 0.0;
    for (size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
    return a.grid().cell_volume() * s;
}

int FieldTrajectory::frame_at(double t) const {
    if (frames.empty()) throw std::out_of_range("empty trajectory");
    double idx = (t - t0) / dt;
    long i = std::lround(idx);
    if (i < 0) i = 0;
    if (i >= frame_count()) i = frame_count() - 1;
    return static_cast<int>(i);
}

void FieldTrajectory::validate() const {
    if (dt <= 0.0) throw std::invalid_argument("trajectory dt must be > 0");
    for (const auto& f : frames)
        if (!(f.grid() == grid))
            throw std::invalid_argument("trajectory frame grid mismatch");
    for (const auto& f : frames)
        if (f.components() != frames.front().components())
            throw std::invalid_argument("trajectory component mismatch");
}

}  // namespace phi4lab
