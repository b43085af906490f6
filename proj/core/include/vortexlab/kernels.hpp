#pragma once
#include <vector>

#include "vortexlab/field.hpp"
#include "vortexlab/geometry.hpp"

namespace vlab {

// K(x) = x_perp / |x|^2 with x_perp = (-x2, x1). The regularized variant
// pushes arguments inside radius eps onto the sphere of radius eps along
// the same ray: K_eps(x) = K(x * max(|x|, eps) / |x|), so |K_eps| <= 1/eps
// everywhere and K_eps = K outside the eps-ball. K_eps(0) = 0, the only
// value compatible with antisymmetry.
struct KernelSpec {
    double epsilon = 0.0; // 0 selects the exact kernel

    bool exact() const { return epsilon == 0.0; }
};

// Exact kernel: throws SimError at x = 0.
Vec2 biot_savart(Vec2 x);

// Dispatches on spec; regularized form is total (defined everywhere).
Vec2 biot_savart(Vec2 x, const KernelSpec& spec);

// Velocity convention for field-based drifts. The spectral inversion
// u = perp-grad of the inverse Laplacian matches the free-space kernel
// (1/2pi) x_perp/|x|^2; the model's particle kernel omits the 1/2pi, so
// runs that couple particles to fields scale the velocity by 2pi.
enum class KernelNorm {
    standard,  // u = perp-grad(inv-Laplacian w), no extra factor
    vortex,    // 2pi times the above, matching K = x_perp/|x|^2
};

// Sampled velocity on the torus grid of the source field. Components are
// stored at the field's nodes; queries interpolate bilinearly with
// periodic wrap.
struct DriftField {
    int n = 0;
    double box_length = 0.0;
    double time = 0.0;
    std::vector<double> ux, uy; // row-major, same layout as VorticityField

    double h() const { return box_length / n; }
    double max_speed() const;
};

// Builds the mean-free velocity field of w on its own grid. The inverse
// Laplacian is spectral; the perp-gradient uses difference-consistent
// wavenumbers sin(k h)/h so the centered-difference divergence of the
// samples vanishes identically, not just to truncation order.
// Throws on non-power-of-two grids.
DriftField drift_from_field(const VorticityField& w, KernelNorm norm);

// Periodic bilinear interpolation; exact at grid nodes.
Vec2 sample_drift(const DriftField& u, Vec2 x);

} // namespace vlab
