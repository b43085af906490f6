#include "vortexlab/plan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "vortexlab/diagnostics.hpp"
#include "vortexlab/errors.hpp"
#include "vortexlab/field.hpp"
#include "vortexlab/nbody.hpp"
#include "vortexlab/quadtree.hpp"
#include "vortexlab/report.hpp"
#include "vortexlab/spectral.hpp"
#include "vortexlab/textio.hpp"

namespace fs = std::filesystem;

namespace vlab {

namespace {

constexpr const char* kKindNames[] = {
    "interacting_run", "pde_run",      "mean_field_run", "chaos_sweep",
    "nbody_bench",     "balance_check", "martingale_sweep",
};

std::string scheme_name(Scheme s) {
    return s == Scheme::euler_maruyama ? "euler_maruyama" : "srk_heun";
}

std::string backend_name(DriftBackend b) {
    return b == DriftBackend::direct ? "direct" : "tree";
}

void issue(std::vector<ConfigIssue>& issues, int line, const std::string& key,
           const std::string& msg) {
    issues.push_back({line, key, msg});
}

std::vector<int> int_list(ConfigMap& map, const std::string& key, int min_value,
                          std::vector<ConfigIssue>& issues) {
    int line = map.line_of(key);
    auto vals = map.take_double_list(key, issues);
    std::vector<int> out;
    if (!vals) return out;
    for (double v : *vals) {
        if (std::abs(v - std::round(v)) > 1e-9 || v < min_value) {
            issue(issues, line, key,
                  "entries must be integers >= " + std::to_string(min_value));
            return {};
        }
        out.push_back(int(std::round(v)));
    }
    if (out.empty()) issue(issues, line, key, "list must not be empty");
    return out;
}

std::vector<std::uint64_t> seed_list(ConfigMap& map, const std::string& key,
                                     std::vector<ConfigIssue>& issues) {
    int line = map.line_of(key);
    auto text = map.take_string(key);
    std::vector<std::uint64_t> out;
    if (!text) return out;
    std::string s = *text;
    for (char& c : s)
        if (c == ',') c = ' ';
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        unsigned long long v = 0;
        if (!parse_u64_strict(tok, v)) {
            issue(issues, line, key, "bad seed '" + tok + "'");
            return {};
        }
        out.push_back(v);
    }
    if (out.empty()) issue(issues, line, key, "list must not be empty");
    return out;
}

Vec2 resolved_center(const ExperimentPlan& p) {
    if (p.init.center) return *p.init.center;
    return {0.5 * p.init.box_length, 0.5 * p.init.box_length};
}

CirculationLaw initial_law(const ExperimentPlan& plan, const SimConfig& cfg) {
    Vec2 c = resolved_center(plan);
    if (plan.init.kind == "lamb_oseen") {
        if (cfg.nu() <= 0.0)
            throw SimError("lamb_oseen initial cloud needs sigma > 0");
        return gaussian_law(plan.init.gamma, c, 2.0 * cfg.nu() * plan.init.t0);
    }
    if (plan.init.kind == "gaussian")
        return gaussian_law(plan.init.gamma, c, plan.init.s2);
    throw SimError("initial law '" + plan.init.kind +
                   "' is not available for particle runs");
}

VorticityField initial_field(const ExperimentPlan& plan, const SimConfig& cfg,
                             std::uint64_t seed) {
    if (plan.init.kind == "lamb_oseen") {
        LambOseen lo{plan.init.gamma, cfg.nu(), plan.init.t0, resolved_center(plan)};
        return lo.field(0.0, plan.init.box_length, plan.init.grid_n);
    }
    if (plan.init.kind == "eigenmode")
        return eigenmode_field(plan.init.box_length, plan.init.grid_n, plan.init.gamma);
    if (plan.init.kind == "random_smooth")
        return random_smooth_field(plan.init.box_length, plan.init.grid_n,
                                   plan.init.rough_kmax, plan.init.gamma, seed);
    throw SimError("initial field '" + plan.init.kind + "' is unknown");
}

struct RunAxes {
    int n = 0;
    double epsilon = 0.0;
    double dt = 0.0;
    double theta = 0.0;
    std::uint64_t seed = 0;
};

std::vector<RunAxes> make_axes(const ExperimentPlan& p) {
    std::vector<RunAxes> out;
    for (int n : p.n_list)
        for (double eps : p.epsilon_list)
            for (double dt : p.dt_list)
                for (double th : p.theta_list)
                    for (std::uint64_t s : p.seeds) out.push_back({n, eps, dt, th, s});
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw SimError("cannot write " + tmp);
        out << content;
        if (!out.flush()) throw SimError("short write on " + tmp);
    }
    fs::rename(tmp, path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json plan_to_json(const ExperimentPlan& p) {
    nlohmann::json j;
    j["kind"] = plan_kind_name(p.kind);
    j["output_dir"] = p.output_dir;
    j["n_list"] = p.n_list;
    j["epsilon_list"] = p.epsilon_list;
    j["dt_list"] = p.dt_list;
    j["theta_list"] = p.theta_list;
    j["seeds"] = p.seeds;
    nlohmann::json b;
    b["n_particles"] = p.base.n_particles;
    b["sigma"] = p.base.sigma;
    b["nu"] = p.base.nu();
    b["moment_order_k"] = p.base.moment_order_k;
    b["circulation_bound_a"] = p.base.circulation_bound_a;
    b["dt"] = p.base.dt;
    b["t_end"] = p.base.t_end;
    b["epsilon"] = p.base.epsilon;
    b["seed"] = p.base.seed;
    b["save_times"] = p.base.save_times;
    j["base"] = b;
    nlohmann::json init;
    init["kind"] = p.init.kind;
    init["gamma"] = p.init.gamma;
    init["t0"] = p.init.t0;
    init["s2"] = p.init.s2;
    init["box_length"] = p.init.box_length;
    init["grid_n"] = p.init.grid_n;
    init["rough_kmax"] = p.init.rough_kmax;
    Vec2 c = resolved_center(p);
    init["center_x"] = c.x;
    init["center_y"] = c.y;
    j["init"] = init;
    j["scheme"] = scheme_name(p.scheme);
    j["backend"] = backend_name(p.backend);
    if (p.clamp_step) j["clamp_step"] = *p.clamp_step;
    nlohmann::json kde;
    kde["rule"] = p.kde.rule == KdeSpec::Bandwidth::silverman ? "silverman" : "fixed";
    kde["fixed_h"] = p.kde.fixed_h;
    kde["auto_cells"] = p.kde.auto_cells;
    j["kde"] = kde;
    j["pair_cells"] = p.pair_cells;
    j["window_s"] = p.window_s;
    j["window_t"] = p.window_t;
    j["path_points"] = p.path_points;
    j["bench_reps"] = p.bench_reps;
    j["bench_direct_max"] = p.bench_direct_max;
    j["order_p"] = p.order_p;
    j["overrides"] = p.overrides;
    j["martingale_catalogue"] = martingale_catalogue_version();
    return j;
}

nlohmann::json common_row(const char* kind, const std::string& key,
                          const RunAxes& ax) {
    nlohmann::json j;
    j["kind"] = kind;
    j["key"] = key;
    j["N"] = ax.n;
    j["seed"] = ax.seed;
    j["epsilon"] = ax.epsilon;
    j["dt"] = ax.dt;
    j["theta"] = ax.theta;
    return j;
}

void scalars_from_report(const FunctionalReport& fr,
                         std::map<std::string, double>& s) {
    s["entropy_H"] = fr.entropy_H;
    s["fisher_I"] = fr.fisher_I;
    s["partial_entropy_Ht"] = fr.partial_entropy_Ht;
    s["partial_fisher_It"] = fr.partial_fisher_It;
    s["moment_Mk"] = fr.moment_Mk;
    s["min_pair_dist"] = fr.min_pair_dist;
    s["l2_norm"] = fr.lp_norms.at("2");
    for (const auto& [g, v] : fr.neg_moment) s["neg_moment_" + g] = v;
}

nlohmann::json monitor_row(const InvariantMonitor& m) {
    nlohmann::json j;
    j["time"] = m.time;
    j["l1"] = m.l1;
    j["l2"] = m.l2;
    j["l4"] = m.l4;
    j["linf"] = m.linf;
    j["mean"] = m.mean;
    j["enstrophy"] = m.enstrophy;
    j["dissipation_integral"] = m.dissipation_integral;
    j["u_max"] = m.u_max;
    j["cfl"] = m.cfl;
    return j;
}

double timed_seconds(int reps, const std::function<void()>& work) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        work();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

std::vector<double> mean_field_times(const ExperimentPlan& plan) {
    std::vector<double> ts(plan.path_points);
    for (int i = 0; i < plan.path_points; ++i)
        ts[i] = plan.base.t_end * i / double(plan.path_points - 1);
    return ts;
}

void run_one(const ExperimentPlan& plan, const RunAxes& ax,
             const std::string& key, const std::string& run_dir) {
    SimConfig cfg = plan.base;
    cfg.n_particles = ax.n;
    cfg.epsilon = ax.epsilon;
    cfg.dt = ax.dt;
    cfg.seed = ax.seed;
    cfg.validate();

    std::string rp = run_dir + "/reports.ndjson";
    std::map<std::string, double> scalars;

    IntegratorSpec ispec;
    ispec.scheme = plan.scheme;
    ispec.backend = plan.backend;
    ispec.theta = ax.theta;
    ispec.order_p = plan.order_p;
    ispec.clamp_step = plan.clamp_step;

    switch (plan.kind) {
        case PlanKind::interacting_run: {
            TrajectoryStore store = run_interacting(initial_law(plan, cfg), cfg, ispec);
            save_store(store, run_dir + "/store");
            FunctionalReport last;
            for (const auto& snap : store.snapshots) {
                last = compute_functional_report(snap, cfg, plan.kde);
                nlohmann::json row = common_row("functional", key, ax);
                row.update(report_to_json(last));
                append_ndjson(rp, row);
            }
            scalars_from_report(last, scalars);
            scalars["clamp_events"] = double(store.clamp_events);
            break;
        }
        case PlanKind::pde_run: {
            VorticityField w0 = initial_field(plan, cfg, ax.seed);
            Ns2dResult res = run_ns2d(w0, cfg.nu(), cfg.t_end, ax.dt,
                                      cfg.save_times, KernelNorm::vortex);
            for (const auto& f : res.fields)
                save_field(f, cfg.nu(), run_dir + "/field_t" + format_double(f.time));
            std::ostringstream mon;
            mon << "time,l1,l2,l4,linf,mean,enstrophy,dissipation_integral,u_max,cfl\n";
            for (const auto& m : res.monitors)
                mon << format_double(m.time) << ',' << format_double(m.l1) << ','
                    << format_double(m.l2) << ',' << format_double(m.l4) << ','
                    << format_double(m.linf) << ',' << format_double(m.mean) << ','
                    << format_double(m.enstrophy) << ','
                    << format_double(m.dissipation_integral) << ','
                    << format_double(m.u_max) << ',' << format_double(m.cfl) << '\n';
            write_text(run_dir + "/monitors.csv", mon.str());

            // NDJSON keeps the checkpoint monitors only; the CSV has every step
            std::vector<std::size_t> picked;
            std::vector<double> marks = cfg.save_times;
            marks.push_back(0.0);
            for (double st : marks)
                for (std::size_t i = 0; i < res.monitors.size(); ++i)
                    if (std::abs(res.monitors[i].time - st) <= 1e-9) {
                        picked.push_back(i);
                        break;
                    }
            picked.push_back(res.monitors.size() - 1);
            std::sort(picked.begin(), picked.end());
            picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
            std::vector<InvariantMonitor> saved;
            for (std::size_t i : picked) {
                saved.push_back(res.monitors[i]);
                nlohmann::json row = common_row("monitor", key, ax);
                row.update(monitor_row(res.monitors[i]));
                append_ndjson(rp, row);
            }

            const InvariantMonitor& fin = res.monitors.back();
            const InvariantMonitor& first = res.monitors.front();
            scalars["l1_norm"] = fin.l1;
            scalars["l2_norm"] = fin.l2;
            scalars["l4_norm"] = fin.l4;
            scalars["linf_norm"] = fin.linf;
            scalars["mean_drift"] = std::abs(fin.mean - first.mean);
            scalars["enstrophy"] = fin.enstrophy;
            double incr = 0.0;
            for (std::size_t i = 1; i < saved.size(); ++i) {
                incr = std::max(incr, saved[i].l1 - saved[i - 1].l1);
                incr = std::max(incr, saved[i].l2 - saved[i - 1].l2);
                incr = std::max(incr, saved[i].l4 - saved[i - 1].l4);
                incr = std::max(incr, saved[i].linf - saved[i - 1].linf);
            }
            scalars["max_lp_increase"] = incr;
            scalars["enstrophy_residual"] =
                std::abs(fin.enstrophy - first.enstrophy + fin.dissipation_integral) /
                first.enstrophy;
            scalars["cfl_warnings"] = double(res.warnings.size());

            if (plan.init.kind == "eigenmode") {
                double rate = 2.0 * cfg.nu() *
                              std::pow(2.0 * M_PI / plan.init.box_length, 2);
                VorticityField exact = eigenmode_field(
                    plan.init.box_length, plan.init.grid_n,
                    plan.init.gamma * std::exp(-rate * cfg.t_end));
                double num = 0.0, den = 0.0;
                const VorticityField& got = res.fields.back();
                for (std::size_t i = 0; i < exact.values.size(); ++i) {
                    num += std::pow(got.values[i] - exact.values[i], 2);
                    den += std::pow(exact.values[i], 2);
                }
                scalars["eigen_rel_err"] = std::sqrt(num / den);
            }
            if (plan.init.kind == "lamb_oseen") {
                LambOseen lo{plan.init.gamma, cfg.nu(), plan.init.t0,
                             resolved_center(plan)};
                VorticityField exact =
                    lo.field(cfg.t_end, plan.init.box_length, plan.init.grid_n);
                double num = 0.0, den = 0.0;
                const VorticityField& got = res.fields.back();
                for (std::size_t i = 0; i < exact.values.size(); ++i) {
                    num += std::abs(got.values[i] - exact.values[i]);
                    den += std::abs(exact.values[i]);
                }
                scalars["lamb_l1_rel_err"] = num / den;
            }
            break;
        }
        case PlanKind::mean_field_run:
        case PlanKind::balance_check: {
            if (plan.init.kind != "lamb_oseen")
                throw SimError("mean-field runs drive the analytic lamb_oseen path");
            LambOseen lo{plan.init.gamma, cfg.nu(), plan.init.t0, resolved_center(plan)};
            std::vector<double> ts = mean_field_times(plan);
            std::vector<VorticityField> path;
            path.reserve(ts.size());
            for (double t : ts)
                path.push_back(lo.field(t, plan.init.box_length, plan.init.grid_n));
            MeanFieldSpec mf;
            mf.scheme = plan.scheme;
            mf.norm = KernelNorm::vortex;
            mf.field_gap_tolerance =
                std::max(0.25, 2.0 * cfg.t_end / (plan.path_points - 1));
            TrajectoryStore store =
                run_mean_field(initial_law(plan, cfg), path, cfg, mf);
            save_ensemble(store.snapshots.back(), cfg.sigma, cfg.epsilon,
                          run_dir + "/final_snapshot.csv");
            FunctionalReport last;
            for (const auto& snap : store.snapshots) {
                last = compute_functional_report(snap, cfg, plan.kde);
                nlohmann::json row = common_row("functional", key, ax);
                row.update(report_to_json(last));
                append_ndjson(rp, row);
            }
            scalars_from_report(last, scalars);
            if (plan.kind == PlanKind::balance_check) {
                BalanceReport br = entropy_balance(store, cfg.nu(), plan.kde);
                nlohmann::json row = common_row("balance", key, ax);
                row.update(balance_to_json(br));
                append_ndjson(rp, row);
                scalars["balance_residual"] = br.residual;
                scalars["entropy_drop"] = br.H_path.front() - br.H_path.back();
            }
            break;
        }
        case PlanKind::chaos_sweep: {
            TrajectoryStore store = run_interacting(initial_law(plan, cfg), cfg, ispec);
            const VortexEnsemble& fin = store.snapshots.back();
            save_ensemble(fin, cfg.sigma, cfg.epsilon, run_dir + "/final_snapshot.csv");
            VorticityField ref = load_field(plan.output_dir + "/reference/field");
            ChaosReport cr = chaos_metrics({fin}, ref, plan.kde, plan.pair_cells);
            nlohmann::json row = common_row("chaos", key, ax);
            row.update(chaos_to_json(cr));
            append_ndjson(rp, row);
            FunctionalReport fr = compute_functional_report(fin, cfg, plan.kde);
            nlohmann::json frow = common_row("functional", key, ax);
            frow.update(report_to_json(fr));
            append_ndjson(rp, frow);
            scalars_from_report(fr, scalars);
            scalars["l1_empirical_vs_pde"] = cr.l1_empirical_vs_pde;
            scalars["chaos_defect_2"] = cr.chaos_defect_2;
            scalars["cov_test"] = cr.cov_test;
            break;
        }
        case PlanKind::martingale_sweep: {
            TrajectoryStore store = run_interacting(initial_law(plan, cfg), cfg, ispec);
            MartingaleSpec mspec =
                default_martingale_spec(plan.window_s, plan.window_t, ax.epsilon);
            double f = martingale_residual(store, mspec);
            nlohmann::json row = common_row("martingale", key, ax);
            row["F"] = f;
            row["window_s"] = plan.window_s;
            row["window_t"] = plan.window_t;
            row["catalogue"] = martingale_catalogue_version();
            append_ndjson(rp, row);
            scalars["martingale_F"] = f;
            break;
        }
        case PlanKind::nbody_bench: {
            VortexEnsemble e = sample_ensemble(initial_law(plan, cfg), ax.n, ax.seed);
            KernelSpec kern{ax.epsilon};
            std::vector<Vec2> tree_vel, direct_vel;
            double tree_s = timed_seconds(plan.bench_reps, [&] {
                QuadTree tree = build_tree(e, ispec.leaf_capacity, plan.order_p);
                tree_vel = tree_drift(tree, e, ax.theta, kern);
            });
            bool have_direct = ax.n <= plan.bench_direct_max;
            double direct_s = 0.0, rel_err = 0.0;
            if (have_direct) {
                direct_s = timed_seconds(plan.bench_reps,
                                         [&] { direct_vel = direct_drift(e, kern); });
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < direct_vel.size(); ++i) {
                    num += norm2(tree_vel[i] - direct_vel[i]);
                    den += norm2(direct_vel[i]);
                }
                rel_err = std::sqrt(num / den);
            }
            std::ostringstream bench;
            bench << "backend,N,theta,p,epsilon,seconds,rel_err\n";
            bench << "tree," << ax.n << ',' << format_double(ax.theta) << ','
                  << plan.order_p << ',' << format_double(ax.epsilon) << ','
                  << format_double(tree_s) << ','
                  << (have_direct ? format_double(rel_err) : std::string()) << '\n';
            if (have_direct)
                bench << "direct," << ax.n << ',' << format_double(ax.theta) << ','
                      << plan.order_p << ',' << format_double(ax.epsilon) << ','
                      << format_double(direct_s) << ",0\n";
            write_text(run_dir + "/bench.csv", bench.str());

            nlohmann::json row = common_row("bench", key, ax);
            row["p"] = plan.order_p;
            row["have_direct"] = have_direct;
            if (have_direct) {
                row["tree_rel_err"] = rel_err;
                scalars["tree_rel_err"] = rel_err;
            }
            append_ndjson(rp, row);
            break;
        }
    }

    nlohmann::json srow = common_row("summary", key, ax);
    srow["scalars"] = scalars;
    append_ndjson(rp, srow);
}

void ensure_reference(const ExperimentPlan& plan) {
    if (plan.kind != PlanKind::chaos_sweep) return;
    std::string ref_dir = plan.output_dir + "/reference";
    if (plan.resume && fs::exists(ref_dir + "/done")) return;
    fs::remove_all(ref_dir);
    fs::create_directories(ref_dir);
    SimConfig cfg = plan.base;
    VorticityField w0 = initial_field(plan, cfg, cfg.seed);
    Ns2dResult res = run_ns2d(w0, cfg.nu(), cfg.t_end, cfg.dt, {cfg.t_end},
                              KernelNorm::vortex);
    save_field(res.fields.back(), cfg.nu(), ref_dir + "/field");
    write_text(ref_dir + "/done", "ok\n");
}

} // namespace

std::string plan_kind_name(PlanKind k) { return kKindNames[int(k)]; }

std::optional<PlanKind> plan_kind_from_name(const std::string& name) {
    for (int i = 0; i < 7; ++i)
        if (name == kKindNames[i]) return PlanKind(i);
    return std::nullopt;
}

std::string run_key(int n, double epsilon, double dt, double theta,
                    std::uint64_t seed) {
    return "N" + std::to_string(n) + "_eps" + format_double(epsilon) + "_dt" +
           format_double(dt) + "_th" + format_double(theta) + "_seed" +
           std::to_string(seed);
}

ExperimentPlan resolve_plan(PlanKind kind, ConfigMap& map,
                            std::vector<ConfigIssue>& issues) {
    ExperimentPlan p;
    p.kind = kind;
    ResolvedSim rs = resolve_sim_config(map, issues);
    p.base = rs.sim;
    p.echo = rs.echo;

    if (auto s = map.take_string("output_dir")) p.output_dir = trim(*s);
    else issue(issues, 0, "output_dir", "required key is missing");

    bool particle_kind = kind != PlanKind::pde_run;
    if (auto s = map.take_string("init")) p.init.kind = trim(*s);
    {
        int line = map.line_of("init");
        bool ok = particle_kind
                      ? (p.init.kind == "lamb_oseen" || p.init.kind == "gaussian")
                      : (p.init.kind == "lamb_oseen" || p.init.kind == "eigenmode" ||
                         p.init.kind == "random_smooth");
        if (!ok)
            issue(issues, line, "init",
                  particle_kind ? "expected lamb_oseen or gaussian"
                                : "expected lamb_oseen, eigenmode or random_smooth");
        if ((kind == PlanKind::mean_field_run || kind == PlanKind::balance_check ||
             kind == PlanKind::chaos_sweep) &&
            p.init.kind != "lamb_oseen")
            issue(issues, line, "init", "this plan kind needs init = lamb_oseen");
    }
    if (auto v = map.take_double("gamma", issues)) p.init.gamma = *v;
    if (auto v = map.take_double("t0", issues)) p.init.t0 = *v;
    if (p.init.t0 <= 0.0) issue(issues, map.line_of("t0"), "t0", "must be > 0");
    if (auto v = map.take_double("s2", issues)) p.init.s2 = *v;
    if (p.init.s2 <= 0.0) issue(issues, map.line_of("s2"), "s2", "must be > 0");
    if (auto v = map.take_double("box_length", issues)) p.init.box_length = *v;
    if (p.init.box_length <= 0.0)
        issue(issues, map.line_of("box_length"), "box_length", "must be > 0");
    if (auto v = map.take_int("grid_n", issues)) p.init.grid_n = int(*v);
    if (p.init.grid_n < 8 || (p.init.grid_n & (p.init.grid_n - 1)) != 0)
        issue(issues, map.line_of("grid_n"), "grid_n",
              "must be a power of two, at least 8");
    if (auto v = map.take_int("rough_kmax", issues)) p.init.rough_kmax = int(*v);
    if (p.init.rough_kmax < 1)
        issue(issues, map.line_of("rough_kmax"), "rough_kmax", "must be >= 1");
    {
        auto cx = map.take_double("center_x", issues);
        auto cy = map.take_double("center_y", issues);
        if (cx.has_value() != cy.has_value())
            issue(issues, 0, "center_x", "center_x and center_y come together");
        if (cx && cy) p.init.center = Vec2{*cx, *cy};
    }

    p.n_list = map.has("sweep_n") ? int_list(map, "sweep_n", 2, issues)
                                  : std::vector<int>{p.base.n_particles};
    if (map.has("sweep_epsilon")) {
        auto v = map.take_double_list("sweep_epsilon", issues);
        if (v) p.epsilon_list = *v;
        for (double e : p.epsilon_list)
            if (e < 0.0)
                issue(issues, map.line_of("sweep_epsilon"), "sweep_epsilon",
                      "entries must be >= 0");
    } else {
        p.epsilon_list = {p.base.epsilon};
    }
    if (map.has("sweep_dt")) {
        auto v = map.take_double_list("sweep_dt", issues);
        if (v) p.dt_list = *v;
        for (double d : p.dt_list)
            if (d <= 0.0)
                issue(issues, map.line_of("sweep_dt"), "sweep_dt",
                      "entries must be > 0");
    } else {
        p.dt_list = {p.base.dt};
    }
    if (map.has("sweep_theta")) {
        auto v = map.take_double_list("sweep_theta", issues);
        if (v) p.theta_list = *v;
        for (double t : p.theta_list)
            if (t < 0.0 || t >= 1.0)
                issue(issues, map.line_of("sweep_theta"), "sweep_theta",
                      "entries must lie in [0, 1)");
    } else {
        p.theta_list = {0.5};
    }
    p.seeds = map.has("seeds") ? seed_list(map, "seeds", issues)
                               : std::vector<std::uint64_t>{p.base.seed};

    if (auto s = map.take_string("scheme")) {
        std::string v = trim(*s);
        if (v == "euler_maruyama") p.scheme = Scheme::euler_maruyama;
        else if (v == "srk_heun") p.scheme = Scheme::srk_heun;
        else issue(issues, map.line_of("scheme"), "scheme",
                   "expected euler_maruyama or srk_heun");
    }
    if (auto s = map.take_string("backend")) {
        std::string v = trim(*s);
        if (v == "direct") p.backend = DriftBackend::direct;
        else if (v == "tree") p.backend = DriftBackend::tree;
        else issue(issues, map.line_of("backend"), "backend",
                   "expected direct or tree");
    }
    if (auto v = map.take_double("clamp_step", issues)) {
        if (*v <= 0.0)
            issue(issues, map.line_of("clamp_step"), "clamp_step", "must be > 0");
        else p.clamp_step = *v;
    }
    if (auto s = map.take_string("kde")) {
        std::string v = trim(*s);
        if (v == "silverman") p.kde.rule = KdeSpec::Bandwidth::silverman;
        else if (v == "fixed") p.kde.rule = KdeSpec::Bandwidth::fixed;
        else issue(issues, map.line_of("kde"), "kde", "expected silverman or fixed");
    }
    if (auto v = map.take_double("kde_h", issues)) p.kde.fixed_h = *v;
    if (p.kde.rule == KdeSpec::Bandwidth::fixed && p.kde.fixed_h <= 0.0)
        issue(issues, map.line_of("kde_h"), "kde_h",
              "fixed bandwidth must be > 0");
    if (auto v = map.take_int("kde_cells", issues)) p.kde.auto_cells = int(*v);
    if (p.kde.auto_cells < 8 || p.kde.auto_cells > 2048)
        issue(issues, map.line_of("kde_cells"), "kde_cells", "must be in [8, 2048]");
    if (auto v = map.take_int("pair_cells", issues)) p.pair_cells = int(*v);
    if (p.pair_cells < 2 || p.pair_cells > 32)
        issue(issues, map.line_of("pair_cells"), "pair_cells", "must be in [2, 32]");
    if (auto v = map.take_double("window_s", issues)) p.window_s = *v;
    if (auto v = map.take_double("window_t", issues)) p.window_t = *v;
    if (auto v = map.take_int("path_points", issues)) p.path_points = int(*v);
    if (p.path_points < 2)
        issue(issues, map.line_of("path_points"), "path_points", "must be >= 2");
    if (auto v = map.take_int("checkpoints", issues)) {
        if (*v < 3)
            issue(issues, map.line_of("checkpoints"), "checkpoints", "must be >= 3");
        else if (kind == PlanKind::mean_field_run || kind == PlanKind::balance_check) {
            std::vector<double> ts;
            for (int i = 0; i < *v; ++i)
                ts.push_back(p.base.t_end * i / double(*v - 1));
            p.base.save_times = ts;
        } else {
            issue(issues, map.line_of("checkpoints"), "checkpoints",
                  "only mean_field_run and balance_check take a checkpoint count");
        }
    } else if (kind == PlanKind::mean_field_run || kind == PlanKind::balance_check) {
        if (p.base.t_end > 0.0 && p.base.save_times.size() < 3) {
            std::vector<double> ts;
            for (int i = 0; i < 11; ++i)
                ts.push_back(p.base.t_end * i / 10.0);
            p.base.save_times = ts;
        }
    }
    if (auto v = map.take_int("bench_reps", issues)) p.bench_reps = int(*v);
    if (p.bench_reps < 1)
        issue(issues, map.line_of("bench_reps"), "bench_reps", "must be >= 1");
    if (auto v = map.take_int("bench_direct_max", issues))
        p.bench_direct_max = int(*v);
    if (auto v = map.take_int("order_p", issues)) p.order_p = int(*v);
    if (p.order_p < 1 || p.order_p > 24)
        issue(issues, map.line_of("order_p"), "order_p", "must be in [1, 24]");

    if (kind == PlanKind::martingale_sweep) {
        if (p.window_s == 0.0 && p.window_t == 0.0) {
            p.window_s = 0.5 * p.base.t_end;
            p.window_t = p.base.t_end;
        }
        if (!(0.0 < p.window_s && p.window_s < p.window_t &&
              p.window_t <= p.base.t_end)) {
            issue(issues, 0, "window_s",
                  "martingale window needs 0 < window_s < window_t <= t_end");
        } else {
            std::set<double> ts(p.base.save_times.begin(), p.base.save_times.end());
            ts.insert(0.5 * p.window_s);
            for (int i = 0; i <= 8; ++i)
                ts.insert(p.window_s + (p.window_t - p.window_s) * i / 8.0);
            p.base.save_times.assign(ts.begin(), ts.end());
        }
    }

    map.finish(issues);

    std::set<std::string> seen;
    for (const RunAxes& ax : make_axes(p)) {
        std::string k = run_key(ax.n, ax.epsilon, ax.dt, ax.theta, ax.seed);
        if (!seen.insert(k).second)
            issue(issues, 0, "seeds", "duplicate run key " + k);
    }
    return p;
}

PlanResult run_plan(const ExperimentPlan& plan) {
    if (plan.output_dir.empty()) throw SimError("plan has no output directory");
    fs::create_directories(plan.output_dir + "/runs");
    write_text(plan.output_dir + "/plan.json", plan_to_json(plan).dump(2) + "\n");
    ensure_reference(plan);

    PlanResult res;
    for (const RunAxes& ax : make_axes(plan)) {
        std::string key = run_key(ax.n, ax.epsilon, ax.dt, ax.theta, ax.seed);
        std::string run_dir = plan.output_dir + "/runs/" + key;
        ++res.runs_total;
        if (plan.resume && fs::exists(run_dir + "/done")) {
            ++res.runs_skipped;
            continue;
        }
        fs::remove_all(run_dir);
        fs::create_directories(run_dir);
        try {
            run_one(plan, ax, key, run_dir);
            write_text(run_dir + "/done", "ok\n");
        } catch (const std::exception& ex) {
            write_text(run_dir + "/error.txt", std::string(ex.what()) + "\n");
            ++res.runs_failed;
            res.failed_keys.push_back(key);
        }
    }
    aggregate_plan(plan);
    return res;
}

void aggregate_plan(const ExperimentPlan& plan) {
    std::string agg;
    std::string bench = "backend,N,theta,p,epsilon,seconds,rel_err\n";
    for (const RunAxes& ax : make_axes(plan)) {
        std::string key = run_key(ax.n, ax.epsilon, ax.dt, ax.theta, ax.seed);
        std::string run_dir = plan.output_dir + "/runs/" + key;
        if (!fs::exists(run_dir + "/done")) continue;
        if (fs::exists(run_dir + "/reports.ndjson"))
            agg += read_text(run_dir + "/reports.ndjson");
        if (plan.kind == PlanKind::nbody_bench && fs::exists(run_dir + "/bench.csv")) {
            std::string piece = read_text(run_dir + "/bench.csv");
            bench += piece.substr(piece.find('\n') + 1);
        }
    }
    write_text(plan.output_dir + "/reports.ndjson", agg);
    write_text(plan.output_dir + "/summary.csv", summarize_reports(agg));
    if (plan.kind == PlanKind::nbody_bench)
        write_text(plan.output_dir + "/bench.csv", bench);
}

std::string summarize_reports(const std::string& ndjson_text) {
    struct Row {
        std::string metric;
        long long n;
        unsigned long long seed;
        std::string key;
        double value;
    };
    std::vector<Row> rows;
    std::istringstream in(ndjson_text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (j.at("kind").get<std::string>() != "summary") continue;
        long long n = j.at("N").get<long long>();
        unsigned long long seed = j.at("seed").get<unsigned long long>();
        std::string key = j.at("key").get<std::string>();
        for (const auto& [name, v] : j.at("scalars").items())
            rows.push_back({name, n, seed, key, v.get<double>()});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.metric, a.n, a.seed, a.key) <
               std::tie(b.metric, b.n, b.seed, b.key);
    });
    std::string out = "metric,N,seed,value\n";
    for (const Row& r : rows)
        out += r.metric + "," + std::to_string(r.n) + "," + std::to_string(r.seed) +
               "," + format_double(r.value) + "\n";
    return out;
}

} // namespace vlab
