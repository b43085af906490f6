#include "vortexlab/circulation.hpp"

#include <algorithm>
#include <cmath>

#include "vortexlab/errors.hpp"
#include "vortexlab/parallel.hpp"
#include "vortexlab/rng.hpp"

namespace vlab {

void GridDensity::finalize() {
    double total = 0.0;
    for (double v : values) {
        if (v < 0.0) throw SimError("grid density has a negative value");
        total += v;
    }
    total *= geom.cell_area();
    if (!(total > 0.0)) throw SimError("grid density has zero mass");
    for (double& v : values) v /= total;
    cdf.resize(values.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc += values[i] * geom.cell_area();
        cdf[i] = acc;
    }
    cdf.back() = 1.0; // guard the binary search against rounding
}

void GridDensity::validate() const {
    if (geom.nx <= 0 || geom.ny <= 0 || !(geom.dx > 0.0) || !(geom.dy > 0.0))
        throw SimError("grid density has a degenerate geometry");
    if (values.size() != std::size_t(geom.cells()))
        throw SimError("grid density value count does not match geometry");
    if (cdf.size() != values.size())
        throw SimError("grid density is missing finalize()");
    double total = 0.0;
    for (double v : values) {
        if (v < 0.0) throw SimError("grid density has a negative value");
        total += v;
    }
    total *= geom.cell_area();
    if (std::abs(total - 1.0) > 1e-10)
        throw SimError("grid density does not integrate to 1 within 1e-10");
}

Vec2 GridDensity::sample(std::uint64_t seed, std::uint64_t stream) const {
    double u = rng::uniform01(seed, rng::Domain::init_position, stream, 0, 0);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t cell = std::min(std::size_t(it - cdf.begin()), cdf.size() - 1);
    int iy = int(cell / geom.nx);
    int ix = int(cell % geom.nx);
    auto jit = rng::uniform_pair(seed, rng::Domain::init_position, stream, 0, 1);
    return {geom.x0 + (ix + jit[0]) * geom.dx, geom.y0 + (iy + jit[1]) * geom.dy};
}

void CirculationLaw::validate() const {
    if (atoms.empty()) throw SimError("circulation law has no atoms");
    double wsum = 0.0;
    for (const auto& a : atoms) {
        if (!(a.weight > 0.0)) throw SimError("atom weights must be > 0");
        if (!std::isfinite(a.m)) throw SimError("atom circulation must be finite");
        wsum += a.weight;
        if (const auto* g = std::get_if<GridDensity>(&a.density)) g->validate();
        if (const auto* g = std::get_if<GaussianDensity>(&a.density)) {
            if (!(g->s2 > 0.0)) throw SimError("gaussian density needs s2 > 0");
        }
    }
    if (std::abs(wsum - 1.0) > 1e-10)
        throw SimError("atom weights must sum to 1 within 1e-10");
}

double CirculationLaw::max_abs_circulation() const {
    double a = 0.0;
    for (const auto& at : atoms) a = std::max(a, std::abs(at.m));
    return a;
}

CirculationLaw lift_vorticity(const VorticityField& w0) {
    w0.validate();
    double h = w0.h();
    double pos_mass = 0.0, neg_mass = 0.0;
    for (double v : w0.values) {
        if (v > 0.0) pos_mass += v;
        else neg_mass -= v;
    }
    pos_mass *= h * h;
    neg_mass *= h * h;
    double a = pos_mass + neg_mass;
    if (!(a > 0.0)) throw SimError("cannot lift an identically zero field");

    // grid nodes i*h become cells centered there
    GridGeom geom{w0.n, w0.n, -0.5 * h, -0.5 * h, h, h};

    CirculationLaw law;
    auto add_part = [&](double sign, double mass) {
        if (!(mass > 0.0)) return;
        GridDensity d;
        d.geom = geom;
        d.values.resize(w0.values.size());
        for (std::size_t i = 0; i < w0.values.size(); ++i)
            d.values[i] = std::max(sign * w0.values[i], 0.0);
        d.finalize();
        law.atoms.push_back({sign * a, mass / a, std::move(d)});
    };
    add_part(+1.0, pos_mass);
    add_part(-1.0, neg_mass);
    law.validate();
    return law;
}

CirculationLaw gaussian_law(double gamma, Vec2 center, double s2) {
    if (!(gamma > 0.0)) throw SimError("gaussian_law needs gamma > 0");
    if (!(s2 > 0.0)) throw SimError("gaussian_law needs s2 > 0");
    CirculationLaw law;
    law.atoms.push_back({gamma, 1.0, GaussianDensity{center, s2}});
    return law;
}

std::vector<double> signed_first_moment(const CirculationLaw& law, GridGeom& geom_out) {
    law.validate();
    const GridDensity* first = nullptr;
    for (const auto& a : law.atoms) {
        const auto* g = std::get_if<GridDensity>(&a.density);
        if (!g) throw SimError("signed_first_moment needs grid densities");
        if (!first) first = g;
        else if (g->geom.nx != first->geom.nx || g->geom.ny != first->geom.ny ||
                 g->geom.x0 != first->geom.x0 || g->geom.dx != first->geom.dx ||
                 g->geom.y0 != first->geom.y0 || g->geom.dy != first->geom.dy)
            throw SimError("signed_first_moment needs one shared geometry");
    }
    geom_out = first->geom;
    std::vector<double> out(first->values.size(), 0.0);
    for (const auto& a : law.atoms) {
        const auto& g = std::get<GridDensity>(a.density);
        double f = a.m * a.weight;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += f * g.values[i];
    }
    return out;
}

VortexEnsemble sample_ensemble(const CirculationLaw& law, int n, std::uint64_t seed) {
    law.validate();
    if (n < 2) throw SimError("sample_ensemble needs n >= 2");
    std::vector<double> wcdf(law.atoms.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < law.atoms.size(); ++j) {
        acc += law.atoms[j].weight;
        wcdf[j] = acc;
    }
    wcdf.back() = 1.0;

    VortexEnsemble e;
    e.circulations.resize(n);
    e.positions.resize(n);
    e.seed = seed;
    e.step_index = 0;
    e.time = 0.0;

    parallel_for(n, [&](std::int64_t b, std::int64_t eidx) {
        for (std::int64_t i = b; i < eidx; ++i) {
            double u = rng::uniform01(seed, rng::Domain::init_atom, i, 0);
            auto it = std::upper_bound(wcdf.begin(), wcdf.end(), u);
            std::size_t j = std::min(std::size_t(it - wcdf.begin()), wcdf.size() - 1);
            const auto& atom = law.atoms[j];
            e.circulations[i] = atom.m;
            if (const auto* g = std::get_if<GaussianDensity>(&atom.density)) {
                Vec2 z = rng::normal_pair(seed, rng::Domain::init_position, i, 0);
                e.positions[i] = g->center + std::sqrt(g->s2) * z;
            } else {
                e.positions[i] = std::get<GridDensity>(atom.density).sample(seed, i);
            }
        }
    });
    return e;
}

} // namespace vlab
