#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/config.hpp"
#include "vortexlab/estimators.hpp"
#include "vortexlab/geometry.hpp"
#include "vortexlab/integrators.hpp"

namespace vlab {

enum class PlanKind {
    interacting_run,
    pde_run,
    mean_field_run,
    chaos_sweep,
    nbody_bench,
    balance_check,
    martingale_sweep,
};

std::string plan_kind_name(PlanKind k);
std::optional<PlanKind> plan_kind_from_name(const std::string& name);

// Initial data selector shared by the pipelines. Particle kinds accept
// lamb_oseen (Gaussian cloud of width 2*nu*t0, circulation gamma) and
// gaussian (explicit s2); field kinds add eigenmode and random_smooth.
struct InitialData {
    std::string kind = "lamb_oseen";
    double gamma = 1.0;
    double t0 = 1.0;
    double s2 = 1.0;
    double box_length = 10.0;
    int grid_n = 128;
    int rough_kmax = 4;
    std::optional<Vec2> center; // defaults to the box center
};

// A resolved sweep: the cartesian product of the axis lists, one run per
// (N, epsilon, dt, theta, seed) tuple. Scalar runs are one-point sweeps.
struct ExperimentPlan {
    PlanKind kind = PlanKind::interacting_run;
    SimConfig base;
    InitialData init;
    std::vector<int> n_list;
    std::vector<double> epsilon_list;
    std::vector<double> dt_list;
    std::vector<double> theta_list;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;

    Scheme scheme = Scheme::euler_maruyama;
    DriftBackend backend = DriftBackend::direct;
    std::optional<double> clamp_step;
    KdeSpec kde;
    int pair_cells = 24;

    double window_s = 0.0;     // martingale window; 0 derives t_end/2
    double window_t = 0.0;     // 0 derives t_end
    int path_points = 21;      // mean-field path resolution
    int bench_reps = 3;
    int bench_direct_max = 20000; // largest N the direct benchmark runs
    int order_p = 8;

    bool resume = false;
    std::vector<std::string> overrides; // recorded verbatim in plan.json
    std::vector<std::string> echo;      // resolved key = value lines
};

// Consumes plan keys plus the embedded SimConfig from `map`.
ExperimentPlan resolve_plan(PlanKind kind, ConfigMap& map,
                            std::vector<ConfigIssue>& issues);

std::string run_key(int n, double epsilon, double dt, double theta,
                    std::uint64_t seed);

struct PlanResult {
    int runs_total = 0;
    int runs_failed = 0;
    int runs_skipped = 0; // resume hits
    std::vector<std::string> failed_keys;
};

// Executes every run of the sweep in key order, one directory per run
// with a `done` marker, then rebuilds reports.ndjson and summary.csv from
// the per-run report files. Failed runs keep their partial artifacts and
// an error.txt; the plan carries on.
PlanResult run_plan(const ExperimentPlan& plan);

// The aggregation half of run_plan, callable on its own: concatenates
// per-run reports in key order and derives summary.csv.
void aggregate_plan(const ExperimentPlan& plan);

// summary.csv text as a pure function of the aggregated NDJSON bytes.
std::string summarize_reports(const std::string& ndjson_text);

} // namespace vlab
