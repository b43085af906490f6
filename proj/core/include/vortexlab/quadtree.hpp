#pragma once
#include <complex>
#include <vector>

#include "vortexlab/ensemble.hpp"
#include "vortexlab/geometry.hpp"

namespace vlab {

// Barnes-Hut quadtree over particle positions. Cells are half-open
// squares: a point on a split line belongs to the upper quadrant. Leaves
// hold at most leaf_capacity particles unless the depth cap forces more
// (degenerate clusters, including all-identical positions, end in one
// leaf at max_depth). Construction is sequential and deterministic.
struct QuadTree {
    struct Node {
        Vec2 center;       // cell center, also the multipole expansion center
        double half = 0.0; // half side length
        int child[4] = {-1, -1, -1, -1};
        int begin = 0, end = 0; // slice of perm
        int depth = 0;
        bool leaf = true;
        double monopole = 0.0; // sum of circulations in the slice
        Vec2 centroid;         // circulation-weighted; cell center when the
                               // signed mass cancels
        double radius = 0.0;   // max particle distance from center
    };

    std::vector<Node> nodes;        // nodes[0] is the root
    std::vector<int> perm;          // particle indices, grouped per node slice
    std::vector<std::complex<double>> coeff; // (order_p+1) per node
    int order_p = 8;
    int leaf_capacity = 16;
    int max_depth = 32;

    const std::complex<double>* node_coeff(int node) const {
        return coeff.data() + std::size_t(node) * (order_p + 1);
    }
};

QuadTree build_tree(const VortexEnsemble& e, int leaf_capacity = 16,
                    int order_p = 8, int max_depth = 32);

} // namespace vlab
