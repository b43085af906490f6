#pragma once
#include <vector>

#include <json.hpp>

#include "vortexlab/density4.hpp"
#include "vortexlab/ensemble.hpp"
#include "vortexlab/estimators.hpp"
#include "vortexlab/field.hpp"
#include "vortexlab/integrators.hpp"

namespace vlab {

// Convergence observables for one checkpoint time. l1_empirical_vs_pde
// and chaos_defect_2 are medians of per-replica values; cov_test is the
// pooled sample covariance of a test function over disjoint index pairs.
struct ChaosReport {
    double time = 0.0;
    double l1_empirical_vs_pde = 0.0;
    double chaos_defect_2 = 0.0;
    double cov_test = 0.0;
    double cov_std_error = 0.0;
    int n_replicas = 0;
};

nlohmann::json chaos_to_json(const ChaosReport& r);

// Entropy balance along a mean-field trajectory: the estimated
// H(g_t) + nu * trapz I(g_s) ds should return to H(g_0).
struct BalanceReport {
    std::vector<double> times;
    std::vector<double> H_path;
    std::vector<double> I_path;
    double residual = 0.0;
};

nlohmann::json balance_to_json(const BalanceReport& r);

// Signed KDE of (1/N) sum M_i delta_{X_i}; integral = mean circulation.
DensityGrid empirical_vorticity(const VortexEnsemble& e, const KdeSpec& spec);

// One-particle signed marginal, pooled over all indices of all replicas
// (exchangeability makes pooling legitimate). Needs >= 2 replicas.
DensityGrid typical_vorticity_1(const std::vector<VortexEnsemble>& replicas,
                                const KdeSpec& spec);

// Two-particle signed marginal from the index pair (1,2) of each replica,
// weighted by m1*m2. Grids above 32 cells per axis are refused.
DensityGrid4 typical_vorticity_2(const std::vector<VortexEnsemble>& replicas,
                                 const GridGeom& per_particle_geom,
                                 const Kde4Spec& spec);

// || density - field ||_L1 with the grid nodes aligned (field node i*h
// vs cell-centered geometry shifted by -h/2).
double field_l1_distance(const DensityGrid& a, const VorticityField& w);

// Grid geometry matching a torus field's nodes.
GridGeom field_geom(const VorticityField& w);

// || g2_hat - g1_hat x g1_hat ||_L1 for one replica: g1 from all
// positions, g2 from the N/2 disjoint index pairs (2i, 2i+1). Disjoint
// pairs keep the pair samples identically distributed without reusing
// any particle, so one seed yields one defect number.
double pair_factorization_defect(const VortexEnsemble& e, const KdeSpec& spec,
                                 int pair_cells, const Kde4Spec& spec4 = {});

// All three chaos metrics against a reference field at the same time.
// phi for cov_test is exp(-|x|^2).
ChaosReport chaos_metrics(const std::vector<VortexEnsemble>& replicas,
                          const VorticityField& pde, const KdeSpec& spec,
                          int pair_cells = 24);

// Partial entropy/Fisher at every checkpoint plus the closure residual
// |H(t_end) + nu * trapz(I) - H(0)|.
BalanceReport entropy_balance(const TrajectoryStore& store, double nu,
                              const KdeSpec& spec);

// Bounded C^2 test functions on the plane for the path functional.
struct TestFunction {
    enum class Kind { gaussian, trig };
    Kind kind = Kind::gaussian;
    double a = 1.0;    // gaussian width: exp(-|x-c|^2 / a^2)
    Vec2 center{0.0, 0.0};
    Vec2 wave{1.0, 0.0}; // trig: cos(wave . x + phase)
    double phase = 0.0;

    double value(Vec2 x) const;
    Vec2 grad(Vec2 x) const;
    double laplacian(Vec2 x) const;
};

// psi(m) = exp(-m^2/2) weighting of circulations, fixed alongside the
// catalogue so residuals are comparable across runs.
double circulation_weight(double m);

// The smoothed path functional evaluated on a stored trajectory:
//   F = (1/N) sum_i psi(M_i) prod_l obs[l](X_i(t_l)) *
//       [ phi(X_i(t)) - phi(X_i(s))
//         - int_s^t ( u_eps_i . grad phi(X_i) + nu lap phi(X_i) ) du ]
// with u_eps the regularized interaction (1/N) sum_j M_j K_eps and the
// time integral a trapezoid over stored checkpoints. include_interaction
// drops the u_eps term to match drift-disabled dynamics.
struct MartingaleSpec {
    std::vector<double> obs_times;       // t_1 < ... < t_k < s
    std::vector<TestFunction> obs;       // same length as obs_times
    TestFunction phi;                    // the C^2 test function
    double s = 0.0;
    double t = 0.0;
    double epsilon = 1e-3;
    bool include_interaction = true;
};

// Versioned default catalogue (id 1): one gaussian observable at t_1 and
// a trig phi. Changing it breaks residual comparability, so bump the id.
MartingaleSpec default_martingale_spec(double s, double t, double epsilon);
int martingale_catalogue_version();

double martingale_residual(const TrajectoryStore& store,
                           const MartingaleSpec& spec);

} // namespace vlab
