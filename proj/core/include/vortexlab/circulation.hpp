#pragma once
#include <cstdint>
#include <variant>
#include <vector>

#include "vortexlab/ensemble.hpp"
#include "vortexlab/field.hpp"
#include "vortexlab/geometry.hpp"

namespace vlab {

// Isotropic Gaussian position density: variance s2 per component.
struct GaussianDensity {
    Vec2 center{0.0, 0.0};
    double s2 = 1.0;
};

// Nonnegative density given as cell averages on a uniform grid,
// normalized to integrate to 1. Sampling: inverse CDF over flattened
// cells, then uniform jitter inside the chosen cell.
struct GridDensity {
    GridGeom geom;
    std::vector<double> values;
    std::vector<double> cdf; // built by finalize()

    void finalize(); // normalizes within tolerance, builds the cdf
    void validate() const;
    Vec2 sample(std::uint64_t seed, std::uint64_t stream) const;
};

using SpatialDensity = std::variant<GaussianDensity, GridDensity>;

// One circulation value with its probability weight and the position law
// of particles that carry it.
struct CirculationAtom {
    double m = 0.0;
    double weight = 0.0;
    SpatialDensity density;
};

// Finitely supported circulation-position law: a mixture over atoms.
struct CirculationLaw {
    std::vector<CirculationAtom> atoms;

    void validate() const; // weights > 0 summing to 1, densities normalized
    double max_abs_circulation() const;
};

// Two-atom lift of a signed scalar field: atoms at +-a with a = integral
// of |w0|, positive/negative parts as position densities. Parts with zero
// mass are dropped; identically zero w0 is an error.
CirculationLaw lift_vorticity(const VorticityField& w0);

// Single-atom law for nonnegative Gaussian data with total mass gamma > 0.
CirculationLaw gaussian_law(double gamma, Vec2 center, double s2);

// Signed first moment sum_j m_j w_j rho_j evaluated back on the common
// grid of the law's grid densities. Inverse of lift_vorticity up to
// rounding; requires every atom to hold a GridDensity on one geometry.
std::vector<double> signed_first_moment(const CirculationLaw& law, GridGeom& geom_out);

// N i.i.d. draws from the law; deterministic in (law, n, seed) and
// independent of thread count.
VortexEnsemble sample_ensemble(const CirculationLaw& law, int n, std::uint64_t seed);

} // namespace vlab
