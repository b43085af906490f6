#include "vortexlab/density4.hpp"

#include <cmath>

#include "vortexlab/errors.hpp"

namespace vlab {

Grid4Geom product_geom(const GridGeom& g) {
    Grid4Geom p;
    p.n = {g.nx, g.ny, g.nx, g.ny};
    p.x0 = {g.x0, g.y0, g.x0, g.y0};
    p.dx = {g.dx, g.dy, g.dx, g.dy};
    return p;
}

double DensityGrid4::total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * geom.cell_vol();
}

DensityGrid4 kde4(const std::vector<std::array<double, 4>>& points,
                  const std::vector<double>* weights, const Grid4Geom& geom,
                  const Kde4Spec& spec) {
    std::size_t n = points.size();
    if (n < 2) throw SimError("kde4 needs at least 2 samples");
    if (weights && weights->size() != n)
        throw SimError("kde4 weights length does not match samples");
    for (int a = 0; a < 4; ++a)
        if (geom.n[a] <= 0 || !(geom.dx[a] > 0.0))
            throw SimError("kde4 geometry is degenerate");

    std::array<double, 4> h{};
    if (spec.fixed_h > 0.0) {
        h = {spec.fixed_h, spec.fixed_h, spec.fixed_h, spec.fixed_h};
    } else {
        double shrink = std::pow(double(n), -1.0 / 8.0) * spec.bandwidth_scale;
        for (int a = 0; a < 4; ++a) {
            double mean = 0.0;
            for (const auto& p : points) mean += p[a];
            mean /= n;
            double var = 0.0;
            for (const auto& p : points) var += (p[a] - mean) * (p[a] - mean);
            var /= (n - 1);
            if (!(var > 0.0))
                throw SimError("kde4 needs positive spread on every axis");
            h[a] = std::sqrt(var) * shrink;
        }
    }

    DensityGrid4 f;
    f.geom = geom;
    f.h = h;
    f.values.assign(geom.cells(), 0.0);

    double knorm = 1.0;
    for (int a = 0; a < 4; ++a) knorm /= std::sqrt(2.0 * M_PI) * h[a];

    const double cutoff = 6.0;
    std::array<std::vector<double>, 4> ker;
    std::array<int, 4> lo{}, hi{};
    for (std::size_t s = 0; s < n; ++s) {
        double w = (weights ? (*weights)[s] : 1.0 / double(n)) * knorm;
        bool empty = false;
        for (int a = 0; a < 4; ++a) {
            double c = points[s][a];
            double cut = cutoff * h[a];
            lo[a] = std::max(0, int(std::ceil((c - cut - geom.x0[a]) / geom.dx[a] - 0.5)));
            hi[a] = std::min(geom.n[a] - 1,
                             int(std::floor((c + cut - geom.x0[a]) / geom.dx[a] - 0.5)));
            if (hi[a] < lo[a]) { empty = true; break; }
            ker[a].resize(hi[a] - lo[a] + 1);
            for (int i = lo[a]; i <= hi[a]; ++i) {
                double d = geom.node(a, i) - c;
                ker[a][i - lo[a]] = std::exp(-d * d / (2.0 * h[a] * h[a]));
            }
        }
        if (empty) continue;
        std::size_t st1 = std::size_t(geom.n[0]);
        std::size_t st2 = st1 * geom.n[1];
        std::size_t st3 = st2 * geom.n[2];
        for (int i3 = lo[3]; i3 <= hi[3]; ++i3) {
            double k3 = w * ker[3][i3 - lo[3]];
            for (int i2 = lo[2]; i2 <= hi[2]; ++i2) {
                double k32 = k3 * ker[2][i2 - lo[2]];
                for (int i1 = lo[1]; i1 <= hi[1]; ++i1) {
                    double k321 = k32 * ker[1][i1 - lo[1]];
                    double* row = f.values.data() + i3 * st3 + i2 * st2 + i1 * st1;
                    const double* k0 = ker[0].data() - lo[0];
                    for (int i0 = lo[0]; i0 <= hi[0]; ++i0)
                        row[i0] += k321 * k0[i0];
                }
            }
        }
    }
    return f;
}

DensityGrid4 product_density(const DensityGrid& f, const DensityGrid& g) {
    if (f.geom.nx != g.geom.nx || f.geom.ny != g.geom.ny ||
        f.geom.dx != g.geom.dx || f.geom.dy != g.geom.dy ||
        f.geom.x0 != g.geom.x0 || f.geom.y0 != g.geom.y0)
        throw SimError("product_density needs matching marginal grids");
    DensityGrid4 p;
    p.geom = product_geom(f.geom);
    p.values.resize(p.geom.cells());
    std::size_t m2 = f.values.size();
    for (std::size_t b = 0; b < m2; ++b) {
        double gb = g.values[b];
        double* slab = p.values.data() + b * m2;
        for (std::size_t a = 0; a < m2; ++a) slab[a] = f.values[a] * gb;
    }
    return p;
}

double l1_distance(const DensityGrid4& a, const DensityGrid4& b) {
    if (a.values.size() != b.values.size())
        throw SimError("l1_distance needs matching grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        s += std::abs(a.values[i] - b.values[i]);
    return s * a.geom.cell_vol();
}

double l1_distance(const DensityGrid& a, const DensityGrid& b) {
    if (a.values.size() != b.values.size() || a.geom.nx != b.geom.nx)
        throw SimError("l1_distance needs matching grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        s += std::abs(a.values[i] - b.values[i]);
    return s * a.geom.cell_area();
}

double entropy4(const DensityGrid4& f, double floor) {
    double s = 0.0;
    for (double v : f.values)
        if (v > floor) s += v * std::log(v);
    return s * f.geom.cell_vol();
}

double fisher4(const DensityGrid4& f, double tau_rel) {
    double mx = 0.0;
    for (double v : f.values) mx = std::max(mx, v);
    if (!(mx > 0.0)) throw SimError("fisher4 needs a nonzero density");
    double tau = tau_rel * mx;
    const auto& g = f.geom;
    std::array<std::size_t, 4> stride = {1, std::size_t(g.n[0]),
                                         std::size_t(g.n[0]) * g.n[1],
                                         std::size_t(g.n[0]) * g.n[1] * g.n[2]};
    double acc = 0.0;
    std::array<int, 4> ix{};
    for (ix[3] = 0; ix[3] < g.n[3]; ++ix[3])
        for (ix[2] = 0; ix[2] < g.n[2]; ++ix[2])
            for (ix[1] = 0; ix[1] < g.n[1]; ++ix[1])
                for (ix[0] = 0; ix[0] < g.n[0]; ++ix[0]) {
                    std::size_t id = ix[0] * stride[0] + ix[1] * stride[1] +
                                     ix[2] * stride[2] + ix[3] * stride[3];
                    double v = f.values[id];
                    if (v <= tau) continue;
                    double g2 = 0.0;
                    for (int a = 0; a < 4; ++a) {
                        double up = ix[a] + 1 < g.n[a] ? f.values[id + stride[a]] : 0.0;
                        double dn = ix[a] > 0 ? f.values[id - stride[a]] : 0.0;
                        double d = (up - dn) / (2.0 * g.dx[a]);
                        g2 += d * d;
                    }
                    acc += g2 / v;
                }
    return acc * g.cell_vol();
}

DensityGrid4 correlated_gaussian_grid4(double s2, double rho,
                                       const Grid4Geom& geom) {
    if (!(s2 > 0.0) || !(rho > -1.0 && rho < 1.0))
        throw SimError("correlated_gaussian_grid4 needs s2 > 0 and |rho| < 1");
    DensityGrid4 f;
    f.geom = geom;
    f.values.resize(geom.cells());
    // per coordinate pair (u, v): density with covariance [[s2, r],[r, s2]]
    double det = s2 * s2 * (1.0 - rho * rho);
    double norm = 1.0 / (2.0 * M_PI * std::sqrt(det));
    double a = s2 / det, b = -rho * s2 / det; // precision entries
    auto pair_density = [&](double u, double v) {
        return norm * std::exp(-0.5 * (a * u * u + 2.0 * b * u * v + a * v * v));
    };
    std::size_t id = 0;
    for (int i3 = 0; i3 < geom.n[3]; ++i3)
        for (int i2 = 0; i2 < geom.n[2]; ++i2)
            for (int i1 = 0; i1 < geom.n[1]; ++i1)
                for (int i0 = 0; i0 < geom.n[0]; ++i0, ++id) {
                    double x1 = geom.node(0, i0), y1 = geom.node(1, i1);
                    double x2 = geom.node(2, i2), y2 = geom.node(3, i3);
                    f.values[id] = pair_density(x1, x2) * pair_density(y1, y2);
                }
    return f;
}

} // namespace vlab
