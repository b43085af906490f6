#include "vortexlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "vortexlab/errors.hpp"

namespace vlab {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) throw SimError("median of an empty set");
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double cov_phi(Vec2 x) { return std::exp(-norm2(x)); }

} // namespace

nlohmann::json chaos_to_json(const ChaosReport& r) {
    nlohmann::json j;
    j["time"] = r.time;
    j["l1_empirical_vs_pde"] = r.l1_empirical_vs_pde;
    j["chaos_defect_2"] = r.chaos_defect_2;
    j["cov_test"] = r.cov_test;
    j["cov_std_error"] = r.cov_std_error;
    j["n_replicas"] = r.n_replicas;
    return j;
}

nlohmann::json balance_to_json(const BalanceReport& r) {
    nlohmann::json j;
    j["times"] = r.times;
    j["H_path"] = r.H_path;
    j["I_path"] = r.I_path;
    j["residual"] = r.residual;
    return j;
}

DensityGrid empirical_vorticity(const VortexEnsemble& e, const KdeSpec& spec) {
    std::vector<double> w(e.n());
    for (int i = 0; i < e.n(); ++i) w[i] = e.circulations[i] / e.n();
    return kde(e.positions, &w, spec);
}

DensityGrid typical_vorticity_1(const std::vector<VortexEnsemble>& replicas,
                                const KdeSpec& spec) {
    if (replicas.size() < 2)
        throw SimError("typical vorticity needs at least 2 replicas");
    std::vector<Vec2> pts;
    std::vector<double> w;
    for (const auto& e : replicas) {
        double scale = 1.0 / (double(e.n()) * replicas.size());
        for (int i = 0; i < e.n(); ++i) {
            pts.push_back(e.positions[i]);
            w.push_back(e.circulations[i] * scale);
        }
    }
    return kde(pts, &w, spec);
}

DensityGrid4 typical_vorticity_2(const std::vector<VortexEnsemble>& replicas,
                                 const GridGeom& per_particle_geom,
                                 const Kde4Spec& spec) {
    if (replicas.size() < 2)
        throw SimError("pair marginal needs at least 2 replicas");
    if (per_particle_geom.nx > 32 || per_particle_geom.ny > 32)
        throw SimError("pair grids above 32 cells per axis are refused");
    std::vector<std::array<double, 4>> pts;
    std::vector<double> w;
    double scale = 1.0 / replicas.size();
    for (const auto& e : replicas) {
        pts.push_back({e.positions[0].x, e.positions[0].y,
                       e.positions[1].x, e.positions[1].y});
        w.push_back(e.circulations[0] * e.circulations[1] * scale);
    }
    return kde4(pts, &w, product_geom(per_particle_geom), spec);
}

GridGeom field_geom(const VorticityField& w) {
    double h = w.h();
    GridGeom g;
    g.nx = w.n;
    g.ny = w.n;
    g.x0 = -0.5 * h;
    g.y0 = -0.5 * h;
    g.dx = h;
    g.dy = h;
    return g;
}

double field_l1_distance(const DensityGrid& a, const VorticityField& w) {
    double h = w.h();
    bool aligned = a.geom.nx == w.n && a.geom.ny == w.n &&
                   std::abs(a.geom.dx - h) <= 1e-12 * h &&
                   std::abs(a.geom.dy - h) <= 1e-12 * h &&
                   std::abs(a.geom.node_x(0)) <= 1e-12 * h &&
                   std::abs(a.geom.node_y(0)) <= 1e-12 * h;
    if (!aligned) throw SimError("density grid does not match the field nodes");
    double s = 0.0;
    for (int iy = 0; iy < w.n; ++iy)
        for (int ix = 0; ix < w.n; ++ix)
            s += std::abs(a.values[a.geom.idx(ix, iy)] - w.at(ix, iy));
    return s * a.geom.cell_area();
}

double pair_factorization_defect(const VortexEnsemble& e, const KdeSpec& spec,
                                 int pair_cells, const Kde4Spec& spec4) {
    if (pair_cells < 2 || pair_cells > 32)
        throw SimError("pair grids take 2..32 cells per axis");
    int pairs = e.n() / 2;
    if (pairs < 2) throw SimError("pair defect needs at least 4 particles");
    KdeSpec s1 = spec;
    s1.grid.reset();
    s1.auto_cells = pair_cells;
    DensityGrid g1 = kde(e.positions, nullptr, s1);
    std::vector<std::array<double, 4>> pts(pairs);
    for (int p = 0; p < pairs; ++p) {
        Vec2 a = e.positions[2 * p], b = e.positions[2 * p + 1];
        pts[p] = {a.x, a.y, b.x, b.y};
    }
    DensityGrid4 g2 = kde4(pts, nullptr, product_geom(g1.geom), spec4);
    return l1_distance(g2, product_density(g1, g1));
}

ChaosReport chaos_metrics(const std::vector<VortexEnsemble>& replicas,
                          const VorticityField& pde, const KdeSpec& spec,
                          int pair_cells) {
    if (replicas.empty()) throw SimError("chaos metrics need replicas");
    for (const auto& e : replicas)
        if (std::abs(e.time - pde.time) > 1e-9)
            throw SimError("replica time disagrees with the field time");

    KdeSpec on_field = spec;
    on_field.grid = field_geom(pde);
    std::vector<double> l1s, defects, pa, pb;
    for (const auto& e : replicas) {
        l1s.push_back(field_l1_distance(empirical_vorticity(e, on_field), pde));
        defects.push_back(pair_factorization_defect(e, spec, pair_cells));
        for (int p = 0; 2 * p + 1 < e.n(); ++p) {
            pa.push_back(cov_phi(e.positions[2 * p]));
            pb.push_back(cov_phi(e.positions[2 * p + 1]));
        }
    }
    std::size_t np = pa.size();
    if (np < 2) throw SimError("cov_test needs at least 2 index pairs");
    double ma = 0.0, mb = 0.0;
    for (std::size_t p = 0; p < np; ++p) { ma += pa[p]; mb += pb[p]; }
    ma /= np;
    mb /= np;
    double cov = 0.0, var_d = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        double d = (pa[p] - ma) * (pb[p] - mb);
        cov += d;
        var_d += d * d;
    }
    double mean_d = cov / np;
    cov /= np - 1;
    var_d = var_d / np - mean_d * mean_d;

    ChaosReport r;
    r.time = pde.time;
    r.l1_empirical_vs_pde = median_of(l1s);
    r.chaos_defect_2 = median_of(defects);
    r.cov_test = std::abs(cov);
    r.cov_std_error = std::sqrt(std::max(var_d, 0.0) / np);
    r.n_replicas = int(replicas.size());
    return r;
}

BalanceReport entropy_balance(const TrajectoryStore& store, double nu,
                              const KdeSpec& spec) {
    store.validate();
    if (store.snapshots.size() < 3)
        throw SimError("entropy balance needs at least 3 checkpoints");
    BalanceReport r;
    r.times = store.times;
    for (const auto& e : store.snapshots) {
        PartialFunctionals pf = partial_functionals(e, spec);
        r.H_path.push_back(pf.entropy);
        r.I_path.push_back(pf.fisher);
    }
    double integral = 0.0;
    for (std::size_t c = 1; c < r.times.size(); ++c)
        integral += 0.5 * (r.times[c] - r.times[c - 1]) * (r.I_path[c] + r.I_path[c - 1]);
    r.residual = std::abs(r.H_path.back() + nu * integral - r.H_path.front());
    return r;
}

} // namespace vlab
