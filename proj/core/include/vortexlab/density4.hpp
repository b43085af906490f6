#pragma once
#include <array>
#include <vector>

#include "vortexlab/estimators.hpp"
#include "vortexlab/geometry.hpp"

namespace vlab {

// Cell-centered 4D grid for two-particle position laws (x1, y1, x2, y2).
// Kept deliberately coarse: pair-law estimates saturate well before 32^4.
struct Grid4Geom {
    std::array<int, 4> n{};
    std::array<double, 4> x0{};
    std::array<double, 4> dx{};

    std::size_t cells() const {
        return std::size_t(n[0]) * n[1] * n[2] * n[3];
    }
    double cell_vol() const { return dx[0] * dx[1] * dx[2] * dx[3]; }
    double node(int axis, int i) const { return x0[axis] + (i + 0.5) * dx[axis]; }
};

// The product geometry (g, g): axes 0,1 from g and 2,3 from g again.
Grid4Geom product_geom(const GridGeom& g);

struct DensityGrid4 {
    Grid4Geom geom;
    std::vector<double> values;
    std::array<double, 4> h{}; // bandwidths used (0 for exact grids)

    double total() const;
};

// Product-kernel Gaussian KDE on a fixed 4D geometry. Bandwidth per axis:
// sd * n^(-1/8) (the 4D analogue of the 2D rule) scaled by
// bandwidth_scale, or fixed_h when positive. weights as in the 2D kde.
struct Kde4Spec {
    double bandwidth_scale = 1.0;
    double fixed_h = 0.0;
};
DensityGrid4 kde4(const std::vector<std::array<double, 4>>& points,
                  const std::vector<double>* weights, const Grid4Geom& geom,
                  const Kde4Spec& spec);

// f(x1) * g(x2) laid out on product_geom-compatible axes.
DensityGrid4 product_density(const DensityGrid& f, const DensityGrid& g);

double l1_distance(const DensityGrid4& a, const DensityGrid4& b);
double l1_distance(const DensityGrid& a, const DensityGrid& b);

double entropy4(const DensityGrid4& f, double floor = 1e-300);

// centered-difference Fisher integral on the 4D grid, same threshold
// convention as the 2D fisher_i
double fisher4(const DensityGrid4& f, double tau_rel = 1e-8);

// Exact correlated-Gaussian pair grid: per-component covariance
// [[s2, rho*s2], [rho*s2, s2]] between the two particles, independent
// across the x and y coordinate pairs.
DensityGrid4 correlated_gaussian_grid4(double s2, double rho,
                                       const Grid4Geom& geom);

} // namespace vlab
