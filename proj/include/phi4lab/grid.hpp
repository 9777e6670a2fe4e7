#pragma once

#include <array>
#include <cstdint>

namespace phi4lab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform periodic grid on a flat torus, dim in {1,2,3}, points_per_axis a
// power of two >= 8. Sites are indexed row-major (last axis fastest).
struct TorusGrid {
    int dim = 1;
    int points_per_axis = 64;
    double side_length = kTwoPi;

    int total_points() const;
    double spacing() const { return side_length / points_per_axis; }
    double cell_volume() const;
    double measure() const;  // total volume of the torus

    // integer mode number along one axis for axis-index i (FFT layout:
    // 0,1,...,n/2,-n/2+1,...,-1)
    int mode_of(int i) const {
        return i <= points_per_axis / 2 ? i : i - points_per_axis;
    }
    // physical wavenumber along one axis
    double wavenumber_of(int i) const {
        return kTwoPi / side_length * mode_of(i);
    }

    std::array<int, 3> site_coords(int site) const;
    int site_index(const std::array<int, 3>& c) const;
    // position of a site, entries beyond dim are zero
    std::array<double, 3> position(int site) const;
    // squared wavenumber |k|^2 of a site index interpreted in mode space
    double k_squared(int site) const;

    bool operator==(const TorusGrid&) const = default;
};

// Validates and constructs. Throws std::invalid_argument on a bad dim,
// non-power-of-two or too-small points_per_axis, or non-positive side.
TorusGrid make_torus_grid(int dim, int points_per_axis,
                          double side_length = kTwoPi);

// geodesic (wrapped Euclidean) distance between two sites
double torus_distance(const TorusGrid& g, int site_a, int site_b);

// largest |k| representable on the grid
double max_wavenumber(const TorusGrid& g);

}  // namespace phi4lab
