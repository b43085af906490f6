#include "vortexlab/quadtree.hpp"

#include <algorithm>
#include <cmath>

#include "vortexlab/errors.hpp"

namespace vlab {

QuadTree build_tree(const VortexEnsemble& e, int leaf_capacity, int order_p,
                    int max_depth) {
    if (leaf_capacity < 1) throw SimError("leaf_capacity must be >= 1");
    if (order_p < 0) throw SimError("order_p must be >= 0");
    int n = e.n();
    if (n < 1) throw SimError("build_tree needs at least one particle");

    QuadTree t;
    t.order_p = order_p;
    t.leaf_capacity = leaf_capacity;
    t.max_depth = max_depth;
    t.perm.resize(n);
    for (int i = 0; i < n; ++i) t.perm[i] = i;

    // squared-up bounding box; degenerate boxes get a unit side so the
    // root is still a valid cell (it will be a single leaf)
    double lox = e.positions[0].x, hix = lox;
    double loy = e.positions[0].y, hiy = loy;
    for (const auto& p : e.positions) {
        lox = std::min(lox, p.x); hix = std::max(hix, p.x);
        loy = std::min(loy, p.y); hiy = std::max(hiy, p.y);
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw NonFiniteError("build_tree met a non-finite position");
    }
    double side = std::max(hix - lox, hiy - loy);
    if (side <= 0.0) side = 1.0;
    double half = 0.5 * side * (1.0 + 1e-12); // keep max coords inside

    QuadTree::Node root;
    root.center = {0.5 * (lox + hix), 0.5 * (loy + hiy)};
    root.half = half;
    root.begin = 0;
    root.end = n;
    root.depth = 0;
    t.nodes.push_back(root);

    std::vector<int> scratch(n);
    std::vector<int> stack = {0};
    while (!stack.empty()) {
        int ni = stack.back();
        stack.pop_back();
        // copy the slice bounds: nodes may reallocate below
        int begin = t.nodes[ni].begin, end = t.nodes[ni].end;
        int depth = t.nodes[ni].depth;
        Vec2 c = t.nodes[ni].center;
        double hf = t.nodes[ni].half;
        if (end - begin <= leaf_capacity || depth >= max_depth) continue;

        // stable 4-way split: quadrant q = (x >= cx) + 2*(y >= cy)
        int count[4] = {0, 0, 0, 0};
        auto quad = [&](int pi) {
            const Vec2& p = e.positions[pi];
            return int(p.x >= c.x) + 2 * int(p.y >= c.y);
        };
        for (int k = begin; k < end; ++k) ++count[quad(t.perm[k])];
        int offs[4];
        offs[0] = begin;
        for (int q = 1; q < 4; ++q) offs[q] = offs[q - 1] + count[q - 1];
        {
            int cursor[4] = {offs[0], offs[1], offs[2], offs[3]};
            for (int k = begin; k < end; ++k)
                scratch[cursor[quad(t.perm[k])]++] = t.perm[k];
            std::copy(scratch.begin() + begin, scratch.begin() + end,
                      t.perm.begin() + begin);
        }
        // all points in one quadrant and every coordinate identical would
        // recurse forever without the depth cap; the cap handles it
        t.nodes[ni].leaf = false;
        double qh = 0.5 * hf;
        for (int q = 0; q < 4; ++q) {
            if (count[q] == 0) continue;
            QuadTree::Node ch;
            ch.center = {c.x + (q & 1 ? qh : -qh), c.y + (q & 2 ? qh : -qh)};
            ch.half = qh;
            ch.begin = offs[q];
            ch.end = offs[q] + count[q];
            ch.depth = depth + 1;
            int ci = int(t.nodes.size());
            t.nodes[ni].child[q] = ci;
            t.nodes.push_back(ch);
            stack.push_back(ci);
        }
    }

    // upward data: monopole, centroid, radius, multipole coefficients
    // a_q = sum_j m_j (z_j - c)^q, accumulated straight from the slice
    t.coeff.assign(t.nodes.size() * std::size_t(order_p + 1), 0.0);
    for (std::size_t ni = 0; ni < t.nodes.size(); ++ni) {
        auto& nd = t.nodes[ni];
        std::complex<double>* a = t.coeff.data() + ni * (order_p + 1);
        double msum = 0.0;
        Vec2 wpos{0.0, 0.0};
        double rad2 = 0.0;
        std::complex<double> cc(nd.center.x, nd.center.y);
        for (int k = nd.begin; k < nd.end; ++k) {
            int pi = t.perm[k];
            double m = e.circulations[pi];
            const Vec2& p = e.positions[pi];
            msum += m;
            wpos += m * p;
            rad2 = std::max(rad2, norm2(p - nd.center));
            std::complex<double> dz = std::complex<double>(p.x, p.y) - cc;
            std::complex<double> pw(1.0, 0.0);
            for (int q = 0; q <= order_p; ++q) {
                a[q] += m * pw;
                pw *= dz;
            }
        }
        nd.monopole = msum;
        nd.radius = std::sqrt(rad2);
        nd.centroid = msum != 0.0 ? (1.0 / msum) * wpos : nd.center;
    }
    return t;
}

} // namespace vlab
