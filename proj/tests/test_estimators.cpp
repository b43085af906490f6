#include <doctest.h>

#include <cmath>
#include <vector>

#include "vortexlab/circulation.hpp"
#include "vortexlab/density4.hpp"
#include "vortexlab/errors.hpp"
#include "vortexlab/estimators.hpp"

using namespace vlab;

namespace {

// E (1 + 2 s2 u)^(k/2) e^-u du: the k-moment of an isotropic Gaussian,
// integrated independently of the grid code
double gaussian_mk(double s2, double k) {
    const int n = 200000;
    const double umax = 50.0, du = umax / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        double u = i * du;
        double f = std::pow(1.0 + 2.0 * s2 * u, 0.5 * k) * std::exp(-u);
        acc += (i == 0 || i == n) ? 0.5 * f : f;
    }
    return acc * du;
}

DensityGrid exact_unit_gaussian(int cells = 512, double half = 8.0) {
    GridGeom g = centered_square_grid({0.0, 0.0}, half, cells);
    return gaussian_grid({0.0, 0.0}, 1.0, g);
}

} // namespace

TEST_CASE("exact Gaussian grid reproduces the closed-form functionals") {
    DensityGrid f = exact_unit_gaussian();
    CHECK(f.is_probability(1e-6));
    CHECK(f.hx == 0.0);

    EntropyResult h = entropy_h(f);
    CHECK(std::abs(h.value - (-std::log(2.0 * M_PI * M_E))) < 1e-3);
    CHECK(h.floored_mass < 1e-10);

    FisherResult fi = fisher_i(f);
    CHECK(std::abs(fi.value - 2.0) < 2e-3);
    CHECK(fi.excluded_mass < 1e-6);

    CHECK(std::abs(lp_norm(f, 1.0) - 1.0) < 1e-6);
    CHECK(std::abs(lp_norm(f, 2.0) - 1.0 / (2.0 * std::sqrt(M_PI))) < 1e-3);
    double inf = lp_norm(f, std::numeric_limits<double>::infinity());
    CHECK(std::abs(inf - 1.0 / (2.0 * M_PI)) < 1e-3 / (2.0 * M_PI));

    CHECK(std::abs(grid_moment_mk(f, 1.0) - gaussian_mk(1.0, 1.0)) < 1e-4);
    CHECK(std::abs(grid_moment_mk(f, 0.5) - gaussian_mk(1.0, 0.5)) < 1e-4);

    // scaling: s2 = 0.25 shifts entropy by log s2 and scales Fisher by 1/s2
    GridGeom g = centered_square_grid({1.0, -2.0}, 4.0, 512);
    DensityGrid fs = gaussian_grid({1.0, -2.0}, 0.25, g);
    CHECK(std::abs(entropy_h(fs).value - (-std::log(2.0 * M_PI * M_E * 0.25))) < 1e-3);
    CHECK(std::abs(fisher_i(fs).value - 8.0) < 8.0 * 1e-3);
}

TEST_CASE("entropy handles compact support and rejects bad mass") {
    DensityGrid f;
    f.geom = GridGeom{64, 64, 0.0, 0.0, 1.0 / 64, 1.0 / 64};
    f.values.assign(64 * 64, 0.0);
    for (int iy = 0; iy < 32; ++iy)
        for (int ix = 0; ix < 64; ++ix)
            f.values[f.geom.idx(ix, iy)] = 2.0; // uniform on the lower half
    CHECK(f.total() == doctest::Approx(1.0));
    EntropyResult h = entropy_h(f);
    CHECK(h.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(h.floored_mass == 0.0);

    DensityGrid bad = f;
    for (auto& v : bad.values) v *= 0.5;
    CHECK_THROWS_AS(entropy_h(bad), SimError);
}

TEST_CASE("Fisher information is convex under mixing") {
    GridGeom g = centered_square_grid({0.0, 0.0}, 12.0, 640);
    DensityGrid a = gaussian_grid({-3.0, 0.0}, 1.0, g);
    DensityGrid b = gaussian_grid({3.0, 0.0}, 1.0, g);
    DensityGrid mix;
    mix.geom = g;
    mix.values.resize(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i)
        mix.values[i] = 0.5 * a.values[i] + 0.5 * b.values[i];
    double ia = fisher_i(a).value, ib = fisher_i(b).value;
    double imix = fisher_i(mix).value;
    CHECK(imix <= 0.5 * ia + 0.5 * ib + 1e-9);
}

TEST_CASE("sampled KDE recovers Gaussian functionals within bands") {
    CirculationLaw law = gaussian_law(1.0, {0.0, 0.0}, 1.0);
    VortexEnsemble e = sample_ensemble(law, 20000, 71);

    KdeSpec spec;
    spec.rule = KdeSpec::Bandwidth::fixed;
    spec.fixed_h = 0.1;
    DensityGrid f = kde(e.positions, nullptr, spec);
    CHECK(std::abs(f.total() - 1.0) < 1e-5);
    CHECK(f.hx == 0.1);
    CHECK(std::abs(entropy_h(f).value - (-std::log(2.0 * M_PI * M_E))) < 0.04);
    // plug-in Fisher carries a 1/(n h^4) noise term, so it wants a wider
    // bandwidth than entropy plus a 1e-3 relative tail cut
    KdeSpec fspec;
    fspec.rule = KdeSpec::Bandwidth::fixed;
    fspec.fixed_h = 0.2;
    DensityGrid ff = kde(e.positions, nullptr, fspec);
    CHECK(std::abs(fisher_i(ff, 1e-3).value - 2.0) < 0.15);

    // Silverman rule: h = sd * n^(-1/6) per axis
    KdeSpec silver;
    DensityGrid fs = kde(e.positions, nullptr, silver);
    double mx = 0.0;
    for (Vec2 p : e.positions) mx += p.x;
    mx /= e.n();
    double vx = 0.0;
    for (Vec2 p : e.positions) vx += (p.x - mx) * (p.x - mx);
    double sd = std::sqrt(vx / (e.n() - 1));
    CHECK(fs.hx == doctest::Approx(sd * std::pow(20000.0, -1.0 / 6.0)).epsilon(1e-6));

    CHECK_THROWS_AS(kde({{0.0, 0.0}}, nullptr, spec), SimError);
    KdeSpec zero = spec;
    zero.fixed_h = 0.0;
    CHECK_THROWS_AS(kde(e.positions, nullptr, zero), SimError);
    std::vector<Vec2> same(10, Vec2{1.0, 1.0});
    CHECK_THROWS_AS(kde(same, nullptr, KdeSpec{}), SimError);
}

TEST_CASE("supplied grids keep only the covered mass") {
    CirculationLaw law = gaussian_law(1.0, {0.0, 0.0}, 1.0);
    VortexEnsemble e = sample_ensemble(law, 5000, 13);
    KdeSpec spec;
    spec.rule = KdeSpec::Bandwidth::fixed;
    spec.fixed_h = 0.1;
    spec.grid = GridGeom{128, 256, 0.0, -8.0, 8.0 / 128, 16.0 / 256};
    DensityGrid f = kde(e.positions, nullptr, spec);
    CHECK(std::abs(f.total() - 0.5) < 0.02); // right half plane only

    // signed weights: empirical vorticity mass is the mean circulation
    std::vector<double> w(e.positions.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = (i % 3 == 0 ? 1.0 : -1.0) / double(w.size());
    KdeSpec full;
    full.rule = KdeSpec::Bandwidth::fixed;
    full.fixed_h = 0.1;
    DensityGrid g = kde(e.positions, &w, full);
    double wsum = 0.0;
    for (double v : w) wsum += v;
    CHECK(g.total() == doctest::Approx(wsum).epsilon(1e-4));
}

TEST_CASE("circulation-resolved functionals group by exact value") {
    CirculationLaw a = gaussian_law(1.0, {-2.0, 0.0}, 1.0);
    CirculationLaw b = gaussian_law(1.0, {2.0, 0.0}, 0.25);
    VortexEnsemble ea = sample_ensemble(a, 600, 1);
    VortexEnsemble eb = sample_ensemble(b, 400, 2);
    VortexEnsemble e;
    e.seed = 3;
    for (int i = 0; i < 600; ++i) {
        e.positions.push_back(ea.positions[i]);
        e.circulations.push_back(1.0);
    }
    for (int i = 0; i < 400; ++i) {
        e.positions.push_back(eb.positions[i]);
        e.circulations.push_back(-1.0);
    }
    e.positions.push_back({9.0, 9.0}); // lone sample, must be excluded
    e.circulations.push_back(2.0);

    PartialFunctionals pf = partial_functionals(e, KdeSpec{});
    REQUIRE(pf.groups.size() == 2);
    CHECK(pf.excluded_groups == 1);
    CHECK(pf.excluded_weight == doctest::Approx(1.0 / 1001.0));
    CHECK(pf.groups[0].circulation == -1.0);
    CHECK(pf.groups[1].circulation == 1.0);
    CHECK(pf.groups[0].count == 400);
    CHECK(pf.groups[1].count == 600);
    double wsum = pf.groups[0].weight + pf.groups[1].weight;
    CHECK(wsum == doctest::Approx(1000.0 / 1001.0));
    double combined = pf.groups[0].weight * pf.groups[0].entropy +
                      pf.groups[1].weight * pf.groups[1].entropy;
    CHECK(pf.entropy == doctest::Approx(combined).epsilon(1e-12));
    // group entropies sit near their exact values (Silverman smoothing bias
    // dominates at these counts)
    CHECK(std::abs(pf.groups[1].entropy - (-std::log(2.0 * M_PI * M_E))) < 0.25);
    CHECK(std::abs(pf.groups[0].entropy - (-std::log(2.0 * M_PI * M_E * 0.25))) < 0.25);
}

TEST_CASE("negative distance moments: exact pair and Gaussian law") {
    VortexEnsemble two;
    two.circulations = {1.0, 1.0};
    two.positions = {{0.0, 0.0}, {2.0, 0.0}};
    NegMomentResult r = neg_distance_moment(two, 1.5);
    CHECK(r.pairs_used == 1);
    CHECK(r.value == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-14));
    CHECK(r.std_error == 0.0);
    CHECK(r.coincident_excluded == 0);

    // iid Gaussian pairs: E |X-Y|^-g = (4 s2)^(-g/2) Gamma(1 - g/2)
    CirculationLaw law = gaussian_law(1.0, {0.0, 0.0}, 1.0);
    VortexEnsemble e = sample_ensemble(law, 2000, 55);
    double gamma = 0.5;
    NegMomentResult m = neg_distance_moment(e, gamma);
    CHECK(m.pairs_used == 100000);
    double want = std::pow(4.0, -0.5 * gamma) * std::tgamma(1.0 - 0.5 * gamma);
    CHECK(std::abs(m.value - want) < 6.0 * m.std_error + 1e-3);
    CHECK(m.std_error > 0.0);
    CHECK(m.std_error < 0.01);

    NegMomentResult m2 = neg_distance_moment(e, gamma);
    CHECK(m2.value == m.value); // replay is bitwise

    VortexEnsemble dup;
    dup.circulations = {1.0, 1.0, 1.0};
    dup.positions = {{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}; // one degenerate pair
    NegMomentResult d = neg_distance_moment(dup, 1.0);
    CHECK(d.coincident_excluded == 1);
    CHECK(d.pairs_used == 2);
    CHECK(d.value == doctest::Approx(1.0));

    // every pair coincident: nothing to average
    VortexEnsemble allsame = two;
    allsame.positions[1] = allsame.positions[0];
    CHECK_THROWS_AS(neg_distance_moment(allsame, 1.0), SimError);

    CHECK_THROWS_AS(neg_distance_moment(two, 2.0), SimError);
}

TEST_CASE("pair grids: products, entropy, Fisher, and distances") {
    GridGeom g = centered_square_grid({0.0, 0.0}, 6.0, 24);
    DensityGrid f = gaussian_grid({0.0, 0.0}, 1.0, g);
    Grid4Geom g4 = product_geom(g);
    CHECK(g4.cells() == 24u * 24u * 24u * 24u);
    CHECK(g4.node(0, 3) == g.node_x(3));
    CHECK(g4.node(3, 3) == g.node_y(3));

    DensityGrid4 prod = product_density(f, f);
    CHECK(std::abs(prod.total() - 1.0) < 1e-4);
    // independence splits the entropy and adds the Fisher information
    double h2 = entropy_h(f).value;
    CHECK(std::abs(entropy4(prod) - 2.0 * h2) < 5e-3);
    double i2 = fisher_i(f).value;
    CHECK(std::abs(fisher4(prod) - 2.0 * i2) < 0.1);

    // rho = 0 correlated grid is the same function as the product
    DensityGrid4 rho0 = correlated_gaussian_grid4(1.0, 0.0, g4);
    CHECK(l1_distance(prod, rho0) < 1e-10);
    DensityGrid4 rho6 = correlated_gaussian_grid4(1.0, 0.6, g4);
    double gap = l1_distance(prod, rho6);
    CHECK(gap > 0.05);
    CHECK(gap < 2.0);

    DensityGrid f2 = gaussian_grid({1.0, 0.0}, 1.0, g);
    CHECK(l1_distance(f, f) == 0.0);
    CHECK(l1_distance(f, f2) > 0.1);
}

TEST_CASE("pair KDE tracks the independent product") {
    CirculationLaw law = gaussian_law(1.0, {0.0, 0.0}, 1.0);
    VortexEnsemble e = sample_ensemble(law, 4000, 91);
    GridGeom g = centered_square_grid({0.0, 0.0}, 5.0, 16);
    Grid4Geom g4 = product_geom(g);
    std::vector<std::array<double, 4>> pts;
    for (int p = 0; p < 2000; ++p)
        pts.push_back({e.positions[2 * p].x, e.positions[2 * p].y,
                       e.positions[2 * p + 1].x, e.positions[2 * p + 1].y});
    DensityGrid4 est = kde4(pts, nullptr, g4, Kde4Spec{});
    CHECK(est.total() > 0.9);
    CHECK(est.total() < 1.01);
    DensityGrid4 truth = correlated_gaussian_grid4(1.0, 0.0, g4);
    CHECK(l1_distance(est, truth) < 0.3);
}
