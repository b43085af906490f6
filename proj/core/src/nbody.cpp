#include "vortexlab/nbody.hpp"

#include <cmath>
#include <mutex>

#include "vortexlab/errors.hpp"
#include "vortexlab/parallel.hpp"

namespace vlab {

namespace {

constexpr double kCoincidentDist = 1e-14;

// one pairwise contribution M_j K(x_i - x_j), exact or regularized
inline Vec2 pair_term(Vec2 xi, Vec2 xj, double mj, const KernelSpec& kernel,
                      int i, int j) {
    Vec2 d = xi - xj;
    double r2 = norm2(d);
    if (kernel.exact()) {
        if (r2 < kCoincidentDist * kCoincidentDist)
            throw CoincidentPairError(i, j, std::sqrt(r2));
        return {-mj * d.y / r2, mj * d.x / r2};
    }
    double eps = kernel.epsilon;
    if (r2 >= eps * eps) return {-mj * d.y / r2, mj * d.x / r2};
    if (r2 == 0.0) return {0.0, 0.0};
    double s = std::sqrt(r2) * eps;
    return {-mj * d.y / s, mj * d.x / s};
}

} // namespace

std::vector<Vec2> direct_drift(const VortexEnsemble& e, const KernelSpec& kernel) {
    int n = e.n();
    std::vector<Vec2> out(n);
    double inv_n = 1.0 / n;
    std::exception_ptr err;
    std::mutex err_mutex;
    parallel_for(n, [&](std::int64_t b, std::int64_t ee) {
        try {
            for (std::int64_t i = b; i < ee; ++i) {
                Vec2 acc{0.0, 0.0};
                Vec2 xi = e.positions[i];
                for (int j = 0; j < n; ++j) {
                    if (j == int(i)) continue;
                    acc += pair_term(xi, e.positions[j], e.circulations[j], kernel,
                                     int(i), j);
                }
                out[i] = inv_n * acc;
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
    return out;
}

namespace {

// velocity of a truncated multipole at z: u_x = Im(phi), u_y = Re(phi)
// with phi = sum_q a_q / (z - c)^(q+1)
inline Vec2 multipole_eval(const std::complex<double>* a, int order_p,
                           std::complex<double> z, std::complex<double> c) {
    std::complex<double> w = 1.0 / (z - c);
    std::complex<double> phi = a[order_p];
    for (int q = order_p - 1; q >= 0; --q) phi = phi * w + a[q];
    phi *= w;
    return {phi.imag(), phi.real()};
}

} // namespace

std::vector<Vec2> tree_drift(const QuadTree& tree, const VortexEnsemble& e,
                             double theta, const KernelSpec& kernel) {
    if (theta < 0.0) throw SimError("theta must be >= 0");
    int n = e.n();
    std::vector<Vec2> out(n);
    double inv_n = 1.0 / n;
    std::exception_ptr err;
    std::mutex err_mutex;
    parallel_for(n, [&](std::int64_t b, std::int64_t ee) {
        try {
            std::vector<int> stack;
            stack.reserve(128);
            for (std::int64_t i = b; i < ee; ++i) {
                Vec2 xi = e.positions[i];
                std::complex<double> z(xi.x, xi.y);
                Vec2 acc{0.0, 0.0};
                stack.clear();
                stack.push_back(0);
                while (!stack.empty()) {
                    const auto& nd = tree.nodes[stack.back()];
                    int ni = stack.back();
                    stack.pop_back();
                    Vec2 dc = xi - nd.center;
                    double dist = norm(dc);
                    double size = 2.0 * nd.half;
                    bool far = dist > nd.radius + kernel.epsilon &&
                               size < theta * dist;
                    if (far) {
                        acc += multipole_eval(tree.node_coeff(ni), tree.order_p, z,
                                              {nd.center.x, nd.center.y});
                        continue;
                    }
                    if (!nd.leaf) {
                        // push in reverse so children pop in index order
                        for (int q = 3; q >= 0; --q)
                            if (nd.child[q] >= 0) stack.push_back(nd.child[q]);
                        continue;
                    }
                    for (int k = nd.begin; k < nd.end; ++k) {
                        int j = tree.perm[k];
                        if (j == int(i)) continue;
                        acc += pair_term(xi, e.positions[j], e.circulations[j],
                                         kernel, int(i), j);
                    }
                }
                out[i] = inv_n * acc;
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace vlab
