#include "phi4lab/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace phi4lab {

int TorusGrid::total_points() const {
    int n = 1;
    for (int d = 0; d < dim; ++d) n *= points_per_axis;
    return n;
}

double TorusGrid::cell_volume() const {
    return std::pow(spacing(), dim);
}

double TorusGrid::measure() const {
    return std::pow(side_length, dim);
}

std::array<int, 3> TorusGrid::site_coords(int site) const {
    std::array<int, 3> c{0, 0, 0};
    for (int d = dim - 1; d >= 0; --d) {
        c[d] = site % points_per_axis;
        site /= points_per_axis;
    }
    return c;
}

int TorusGrid::site_index(const std::array<int, 3>& c) const {
    int idx = 0;
    for (int d = 0; d < dim; ++d) idx = idx * points_per_axis + c[d];
    return idx;
}

std::array<double, 3> TorusGrid::position(int site) const {
    auto c = site_coords(site);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) x[d] = c[d] * spacing();
    return x;
}

double TorusGrid::k_squared(int site) const {
    auto c = site_coords(site);
    double k2 = 0.0;
    for (int d = 0; d < dim; ++d) {
        double k = wavenumber_of(c[d]);
        k2 += k * k;
    }
    return k2;
}

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

TorusGrid make_torus_grid(int dim, int points_per_axis, double side_length) {
    if (dim < 1 || dim > 3)
        throw std::invalid_argument("grid dim must be 1, 2, or 3, got " +
                                    std::to_string(dim));
    if (!is_power_of_two(points_per_axis) || points_per_axis < 8)
        throw std::invalid_argument(
            "points_per_axis must be a power of two >= 8, got " +
            std::to_string(points_per_axis));
    if (!(side_length > 0.0))
        throw std::invalid_argument("side_length must be positive");
    return TorusGrid{dim, points_per_axis, side_length};
}

double torus_distance(const TorusGrid& g, int site_a, int site_b) {
    auto ca = g.site_coords(site_a);
    auto cb = g.site_coords(site_b);
    double d2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
        double dx = std::abs(ca[d] - cb[d]) * g.spacing();
        dx = std::min(dx, g.side_length - dx);
        d2 += dx * dx;
    }
    return std::sqrt(d2);
}

double max_wavenumber(const TorusGrid& g) {
    double per_axis = kTwoPi / g.side_length * (g.points_per_axis / 2);
    return per_axis * std::sqrt(static_cast<double>(g.dim));
}

}  // namespace phi4lab
