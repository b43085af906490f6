#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "vortexlab/geometry.hpp"

namespace vlab {

// Scalar vorticity on the torus [0,L)^2, sampled at nodes x_i = i*L/n.
// Row-major storage: values[iy*n + ix]. n must be a power of two so the
// spectral solver can take it as-is.
struct VorticityField {
    int n = 0;
    double box_length = 0.0;
    double time = 0.0;
    std::vector<double> values;

    double h() const { return box_length / n; }
    double& at(int ix, int iy) { return values[std::size_t(iy) * n + ix]; }
    double at(int ix, int iy) const { return values[std::size_t(iy) * n + ix]; }
    double node_x(int ix) const { return ix * h(); }
    double node_y(int iy) const { return iy * h(); }

    // Throws on non-power-of-two n, size mismatch, or non-finite values.
    void validate() const;

    double integral() const;      // h^2 * sum (exact trapezoid on the torus)
    double abs_integral() const;  // integral of |w|
};

// Binary snapshot: row-major float64 plus a JSON sidecar carrying
// {n, box_length, time, nu}. path gets ".bin" and ".json" suffixes.
void save_field(const VorticityField& f, double nu, const std::string& path);
VorticityField load_field(const std::string& path, double* nu_out = nullptr);

// Plain CSV "ix,iy,x,y,w" for grids small enough to eyeball.
void export_field_csv(const VorticityField& f, const std::string& path);

// Radially symmetric self-similar vortex: per-component variance
// s^2(t) = 2*nu*(t + t0), amplitude gamma / (2*pi*s^2).
struct LambOseen {
    double gamma = 1.0;
    double nu = 0.1;
    double t0 = 1.0;
    Vec2 center{0.0, 0.0};

    double s2(double t) const { return 2.0 * nu * (t + t0); }
    double value(double t, Vec2 x) const;
    VorticityField field(double t, double box_length, int n) const;
};

// sin(2*pi*x/L) * sin(2*pi*y/L): eigenmode of the periodic Laplacian,
// decays under pure diffusion at rate nu * 2 * (2*pi/L)^2.
VorticityField eigenmode_field(double box_length, int n, double amplitude = 1.0);

// Mean-zero band-limited field with modes 1 <= |k_i| <= kmax, amplitudes
// drawn from the given seed, rescaled so max|w| = amplitude.
VorticityField random_smooth_field(double box_length, int n, int kmax,
                                   double amplitude, std::uint64_t seed);

} // namespace vlab
