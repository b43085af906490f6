#include "vortexlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "vortexlab/errors.hpp"
#include "vortexlab/parallel.hpp"
#include "vortexlab/rng.hpp"

namespace vlab {

namespace {
constexpr double kKernelCutoff = 6.0; // bandwidths; tail mass ~ 2e-9
}

double DensityGrid::total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * geom.cell_area();
}

bool DensityGrid::is_probability(double tol) const {
    return std::abs(total() - 1.0) <= tol;
}

GridGeom centered_square_grid(Vec2 center, double half_extent, int cells) {
    GridGeom g;
    g.nx = g.ny = cells;
    g.dx = g.dy = 2.0 * half_extent / cells;
    g.x0 = center.x - half_extent;
    g.y0 = center.y - half_extent;
    return g;
}

DensityGrid gaussian_grid(Vec2 center, double s2, const GridGeom& geom) {
    DensityGrid f;
    f.geom = geom;
    f.values.resize(std::size_t(geom.cells()));
    double inv = 1.0 / (2.0 * M_PI * s2);
    for (int iy = 0; iy < geom.ny; ++iy)
        for (int ix = 0; ix < geom.nx; ++ix) {
            Vec2 p{geom.node_x(ix), geom.node_y(iy)};
            f.values[geom.idx(ix, iy)] =
                inv * std::exp(-norm2(p - center) / (2.0 * s2));
        }
    return f;
}

DensityGrid kde(const std::vector<Vec2>& points,
                const std::vector<double>* weights, const KdeSpec& spec) {
    std::size_t n = points.size();
    if (n < 2) throw SimError("kde needs at least 2 samples");
    if (weights && weights->size() != n)
        throw SimError("kde weights length does not match samples");

    // bandwidths from the unweighted positional spread
    double hx, hy;
    if (spec.rule == KdeSpec::Bandwidth::fixed) {
        if (!(spec.fixed_h > 0.0)) throw SimError("fixed bandwidth must be > 0");
        hx = hy = spec.fixed_h;
    } else {
        double mx = 0, my = 0;
        for (const auto& p : points) { mx += p.x; my += p.y; }
        mx /= n; my /= n;
        double vx = 0, vy = 0;
        for (const auto& p : points) {
            vx += (p.x - mx) * (p.x - mx);
            vy += (p.y - my) * (p.y - my);
        }
        vx /= (n - 1); vy /= (n - 1);
        if (!(vx > 0.0) || !(vy > 0.0))
            throw SimError("kde needs positive sample spread under silverman");
        double shrink = std::pow(double(n), -1.0 / 6.0);
        hx = std::sqrt(vx) * shrink;
        hy = std::sqrt(vy) * shrink;
    }

    GridGeom geom;
    if (spec.grid) {
        geom = *spec.grid;
        if (geom.nx <= 0 || geom.ny <= 0 || !(geom.dx > 0) || !(geom.dy > 0))
            throw SimError("kde grid geometry is degenerate");
    } else {
        double lox = points[0].x, hix = lox, loy = points[0].y, hiy = loy;
        for (const auto& p : points) {
            lox = std::min(lox, p.x); hix = std::max(hix, p.x);
            loy = std::min(loy, p.y); hiy = std::max(hiy, p.y);
        }
        geom.nx = geom.ny = spec.auto_cells;
        geom.x0 = lox - 5.0 * hx;
        geom.y0 = loy - 5.0 * hy;
        geom.dx = (hix - lox + 10.0 * hx) / geom.nx;
        geom.dy = (hiy - loy + 10.0 * hy) / geom.ny;
    }

    // samples sorted by y (index tie-break) so row scans are contiguous
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = int(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (points[a].y != points[b].y) return points[a].y < points[b].y;
        return a < b;
    });
    std::vector<double> sy(n), sx(n), sw(n);
    for (std::size_t r = 0; r < n; ++r) {
        sy[r] = points[order[r]].y;
        sx[r] = points[order[r]].x;
        sw[r] = weights ? (*weights)[order[r]] : 1.0 / double(n);
    }

    DensityGrid f;
    f.geom = geom;
    f.hx = hx;
    f.hy = hy;
    f.values.assign(std::size_t(geom.cells()), 0.0);

    double cutx = kKernelCutoff * hx, cuty = kKernelCutoff * hy;
    double inv2hx2 = 1.0 / (2.0 * hx * hx), inv2hy2 = 1.0 / (2.0 * hy * hy);
    double knorm = 1.0 / (2.0 * M_PI * hx * hy);

    parallel_for(geom.ny, [&](std::int64_t rb, std::int64_t re) {
        for (std::int64_t iy = rb; iy < re; ++iy) {
            double yc = geom.node_y(int(iy));
            // y-band of samples reaching this row
            auto lo = std::lower_bound(sy.begin(), sy.end(), yc - cuty) - sy.begin();
            auto hi = std::upper_bound(sy.begin(), sy.end(), yc + cuty) - sy.begin();
            double* row = f.values.data() + std::size_t(iy) * geom.nx;
            for (auto s = lo; s < hi; ++s) {
                double dy = yc - sy[s];
                double gy = sw[s] * knorm * std::exp(-dy * dy * inv2hy2);
                if (gy == 0.0) continue;
                // x-window of cells this sample reaches
                int ix0 = std::max(0, int(std::ceil((sx[s] - cutx - geom.x0) / geom.dx - 0.5)));
                int ix1 = std::min(geom.nx - 1,
                                   int(std::floor((sx[s] + cutx - geom.x0) / geom.dx - 0.5)));
                if (ix1 < ix0) continue;
                // multiplicative recurrence for exp(-(x - sx)^2 / 2hx^2)
                double x = geom.node_x(ix0) - sx[s];
                double g = std::exp(-x * x * inv2hx2);
                double q = std::exp(-geom.dx * geom.dx * inv2hx2);
                double r = std::exp(-2.0 * x * geom.dx * inv2hx2) * q;
                for (int ix = ix0; ix <= ix1; ++ix) {
                    row[ix] += gy * g;
                    g *= r;
                    r *= q * q;
                }
            }
        }
    });
    return f;
}

EntropyResult entropy_h(const DensityGrid& f, double floor) {
    if (!f.is_probability())
        throw SimError("entropy needs a probability grid (total within 1e-6 of 1)");
    EntropyResult out;
    // compensated sum: exact oracle grids run to millions of cells and the
    // entropy balance compares differences of these values at 1e-12
    double s = 0.0, comp = 0.0, fl = 0.0;
    for (double v : f.values) {
        if (v > floor) {
            double term = v * std::log(v) - comp;
            double next = s + term;
            comp = (next - s) - term;
            s = next;
        } else {
            fl += std::max(v, 0.0);
        }
    }
    out.value = s * f.geom.cell_area();
    out.floored_mass = fl * f.geom.cell_area();
    return out;
}

FisherResult fisher_i(const DensityGrid& f, double tau_rel) {
    double mx = 0.0;
    for (double v : f.values) mx = std::max(mx, v);
    if (!(mx > 0.0)) throw SimError("fisher needs a nonzero density");
    double tau = tau_rel * mx;
    const auto& g = f.geom;
    auto val = [&](int ix, int iy) -> double {
        if (ix < 0 || iy < 0 || ix >= g.nx || iy >= g.ny) return 0.0;
        return f.values[g.idx(ix, iy)];
    };
    double acc = 0.0, excluded = 0.0;
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            double v = f.values[g.idx(ix, iy)];
            if (v <= tau) {
                excluded += std::max(v, 0.0);
                continue;
            }
            double gx = (val(ix + 1, iy) - val(ix - 1, iy)) / (2.0 * g.dx);
            double gy = (val(ix, iy + 1) - val(ix, iy - 1)) / (2.0 * g.dy);
            acc += (gx * gx + gy * gy) / v;
        }
    }
    FisherResult out;
    out.value = acc * g.cell_area();
    out.excluded_mass = excluded * g.cell_area();
    out.threshold = tau;
    return out;
}

double lp_norm(const DensityGrid& f, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1.0)) throw SimError("lp_norm needs p >= 1");
    double s = 0.0;
    for (double v : f.values) s += std::pow(std::abs(v), p);
    return std::pow(s * f.geom.cell_area(), 1.0 / p);
}

double grid_moment_mk(const DensityGrid& f, double k) {
    if (!(k > 0.0 && k < 2.0)) throw SimError("moment order must lie in (0, 2)");
    double s = 0.0;
    const auto& g = f.geom;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            double r2 = g.node_x(ix) * g.node_x(ix) + g.node_y(iy) * g.node_y(iy);
            s += std::pow(1.0 + r2, 0.5 * k) * f.values[g.idx(ix, iy)];
        }
    return s * g.cell_area();
}

PartialFunctionals partial_functionals(const VortexEnsemble& e,
                                       const KdeSpec& spec, double tau_rel) {
    // exact-value grouping: circulations come from finitely many atoms
    std::map<double, std::vector<int>> groups;
    for (int i = 0; i < e.n(); ++i) groups[e.circulations[i]].push_back(i);

    PartialFunctionals out;
    for (const auto& [m, idx] : groups) {
        double weight = double(idx.size()) / e.n();
        if (idx.size() < 2) {
            ++out.excluded_groups;
            out.excluded_weight += weight;
            continue;
        }
        std::vector<Vec2> pts;
        pts.reserve(idx.size());
        for (int i : idx) pts.push_back(e.positions[i]);
        DensityGrid f = kde(pts, nullptr, spec);
        PartialGroup g;
        g.circulation = m;
        g.count = int(idx.size());
        g.weight = weight;
        g.entropy = entropy_h(f).value;
        g.fisher = fisher_i(f, tau_rel).value;
        out.groups.push_back(g);
        out.entropy += weight * g.entropy;
        out.fisher += weight * g.fisher;
    }
    return out;
}

NegMomentResult neg_distance_moment(const VortexEnsemble& e, double gamma,
                                    long long max_pairs) {
    if (!(gamma > 0.0 && gamma < 2.0))
        throw SimError("neg_distance_moment needs gamma in (0, 2)");
    if (max_pairs < 1) throw SimError("max_pairs must be >= 1");
    long long n = e.n();
    long long all = n * (n - 1) / 2;
    NegMomentResult out;
    double s = 0.0, s2 = 0.0;
    long long used = 0, skipped = 0;
    auto add = [&](int i, int j) {
        double d2 = norm2(e.positions[i] - e.positions[j]);
        if (d2 == 0.0) {
            ++skipped;
            return;
        }
        double v = std::pow(d2, -0.5 * gamma);
        s += v;
        s2 += v * v;
        ++used;
    };
    if (all <= max_pairs) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) add(i, int(j));
    } else {
        for (long long k = 0; k < max_pairs; ++k) {
            auto u = rng::uniform_pair(e.seed, rng::Domain::pair_sample, k,
                                       e.step_index);
            int i = std::min<int>(int(u[0] * n), int(n - 1));
            int j = std::min<int>(int(u[1] * (n - 1)), int(n - 2));
            if (j >= i) ++j;
            add(i, j);
        }
    }
    if (used == 0) throw SimError("neg_distance_moment had no usable pairs");
    out.value = s / used;
    double var = std::max(0.0, s2 / used - out.value * out.value);
    out.std_error = std::sqrt(var / used);
    out.pairs_used = used;
    out.coincident_excluded = skipped;
    return out;
}

} // namespace vlab
