#pragma once
#include <vector>

#include "vortexlab/ensemble.hpp"
#include "vortexlab/kernels.hpp"
#include "vortexlab/quadtree.hpp"

namespace vlab {

// b_i = (1/N) sum_{j != i} M_j K(X_i - X_j). Exact kernel throws
// CoincidentPairError when a distinct pair sits closer than 1e-14.
// O(N^2); parallel over targets, fixed accumulation order per target.
std::vector<Vec2> direct_drift(const VortexEnsemble& e, const KernelSpec& kernel);

// Same sum through the tree. A node is taken as a multipole when
// size/distance < theta, the target lies outside its particle radius,
// and (for regularized kernels) every source in it is farther than
// epsilon, so far-field terms are never regularized incorrectly.
// theta = 0 degenerates to the direct sum up to reassociation.
std::vector<Vec2> tree_drift(const QuadTree& tree, const VortexEnsemble& e,
                             double theta, const KernelSpec& kernel);

} // namespace vlab
