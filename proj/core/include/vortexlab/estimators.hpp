#pragma once
#include <optional>
#include <vector>

#include "vortexlab/ensemble.hpp"
#include "vortexlab/geometry.hpp"

namespace vlab {

// Gaussian product-kernel KDE. Bandwidth: Silverman per axis,
// h = sd * n^(-1/6), or a fixed common h. When no grid is given, one is
// built covering every sample plus five bandwidths of margin; a supplied
// grid is used as-is (off-grid tails then simply drop, which the totals
// reflect honestly).
struct KdeSpec {
    enum class Bandwidth { silverman, fixed };
    Bandwidth rule = Bandwidth::silverman;
    double fixed_h = 0.0;
    std::optional<GridGeom> grid;
    int auto_cells = 256; // per axis, for the auto grid
};

// Cell-averaged density estimate (or exact density) with its quadrature.
struct DensityGrid {
    GridGeom geom;
    std::vector<double> values;
    double hx = 0.0, hy = 0.0; // bandwidths used (0 for exact grids)

    double total() const; // sum * cell_area
    bool is_probability(double tol = 1e-6) const;
};

// weights: optional signed weights (empirical vorticity uses M_i/N);
// nullptr means probability weights 1/n. Throws on fewer than 2 points,
// zero spread under the Silverman rule, or non-positive fixed bandwidth.
DensityGrid kde(const std::vector<Vec2>& points,
                const std::vector<double>* weights, const KdeSpec& spec);

// Exact density helpers for oracle grids.
DensityGrid gaussian_grid(Vec2 center, double s2, const GridGeom& geom);
GridGeom centered_square_grid(Vec2 center, double half_extent, int cells);

// Boltzmann entropy integral f log f. Requires a probability grid
// (total within 1e-6 of 1). Cells below the floor contribute zero.
struct EntropyResult {
    double value = 0.0;
    double floored_mass = 0.0; // mass sitting at/below the floor
};
EntropyResult entropy_h(const DensityGrid& f, double floor = 1e-300);

// Plug-in Fisher information via centered differences, restricted to
// cells with f > tau = tau_rel * max f; the skipped mass is reported, not
// hidden. Off-grid neighbors count as zero density.
struct FisherResult {
    double value = 0.0;
    double excluded_mass = 0.0;
    double threshold = 0.0;
};
FisherResult fisher_i(const DensityGrid& f, double tau_rel = 1e-8);

// \|f\|_p for p in [1, inf); pass p = infinity for the max norm.
double lp_norm(const DensityGrid& f, double p);

// integral of (1 + |x|^2)^(k/2) f(x) dx, k in (0, 2)
double grid_moment_mk(const DensityGrid& f, double k);

// Circulation-resolved functionals: samples grouped by exact circulation
// value, one KDE per group, combined with empirical frequencies.
// Groups with fewer than 2 samples are excluded and flagged.
struct PartialGroup {
    double circulation = 0.0;
    int count = 0;
    double weight = 0.0;
    double entropy = 0.0;
    double fisher = 0.0;
};
struct PartialFunctionals {
    double entropy = 0.0; // sum of weight * per-group entropy
    double fisher = 0.0;
    std::vector<PartialGroup> groups;
    int excluded_groups = 0;
    double excluded_weight = 0.0;
};
PartialFunctionals partial_functionals(const VortexEnsemble& e,
                                       const KdeSpec& spec,
                                       double tau_rel = 1e-8);

// Monte Carlo estimate of E |X_i - X_j|^(-gamma), gamma in (0, 2), over
// up to max_pairs distinct pairs (all pairs when that is fewer). Pair
// choice is a pure function of (ensemble seed, step_index), so reruns
// match bit for bit. Zero-distance pairs are excluded and counted.
struct NegMomentResult {
    double value = 0.0;
    double std_error = 0.0;
    long long pairs_used = 0;
    long long coincident_excluded = 0;
};
NegMomentResult neg_distance_moment(const VortexEnsemble& e, double gamma,
                                    long long max_pairs = 100000);

} // namespace vlab
