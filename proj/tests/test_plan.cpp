#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vortexlab/config.hpp"
#include "vortexlab/errors.hpp"
#include "vortexlab/field.hpp"
#include "vortexlab/plan.hpp"

using namespace vlab;
namespace fs = std::filesystem;

namespace {

struct Resolved {
    ExperimentPlan plan;
    std::vector<ConfigIssue> issues;
};

Resolved resolve_text(PlanKind kind, const std::string& text) {
    Resolved r;
    ConfigMap map = ConfigMap::parse_text(text, r.issues);
    r.plan = resolve_plan(kind, map, r.issues);
    return r;
}

bool has_issue(const std::vector<ConfigIssue>& issues, const std::string& key) {
    for (const auto& i : issues)
        if (i.key == key) return true;
    return false;
}

std::string fresh_dir(const std::string& tag) {
    std::string d = "/tmp/vlab_plan_" + tag;
    fs::remove_all(d);
    return d;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(bool(in));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

int count_kind(const std::string& ndjson, const std::string& kind) {
    int n = 0;
    for (const auto& line : lines_of(ndjson))
        if (nlohmann::json::parse(line).at("kind") == kind) ++n;
    return n;
}

} // namespace

TEST_CASE("plan kind names round-trip") {
    const char* names[] = {"interacting_run", "pde_run",      "mean_field_run",
                           "chaos_sweep",     "nbody_bench",  "balance_check",
                           "martingale_sweep"};
    for (int i = 0; i < 7; ++i) {
        auto k = plan_kind_from_name(names[i]);
        REQUIRE(k.has_value());
        CHECK(plan_kind_name(*k) == names[i]);
    }
    CHECK(!plan_kind_from_name("pde").has_value());
    CHECK(!plan_kind_from_name("").has_value());
}

TEST_CASE("run_key format is frozen") {
    // directory names on disk; changing this breaks resume across versions
    CHECK(run_key(1000, 1e-3, 0.01, 0.5, 7) == "N1000_eps0.001_dt0.01_th0.5_seed7");
    CHECK(run_key(50, 0.0, 0.05, 0.0, 0) == "N50_eps0_dt0.05_th0_seed0");
}

TEST_CASE("resolve_plan fills documented defaults") {
    auto r = resolve_text(PlanKind::interacting_run,
                          "n_particles = 16\n"
                          "sigma = 0.2\n"
                          "dt = 0.01\n"
                          "epsilon = 0.05\n"
                          "t_end = 0\n"
                          "output_dir = /tmp/vlab_plan_unused\n"
                          "init = gaussian\n");
    CHECK(r.issues.empty());
    const ExperimentPlan& p = r.plan;
    CHECK(p.kind == PlanKind::interacting_run);
    CHECK(p.n_list == std::vector<int>{16});
    CHECK(p.epsilon_list == std::vector<double>{0.05});
    CHECK(p.dt_list == std::vector<double>{0.01});
    CHECK(p.theta_list == std::vector<double>{0.5});
    CHECK(p.seeds == std::vector<std::uint64_t>{0});
    CHECK(p.scheme == Scheme::euler_maruyama);
    CHECK(p.backend == DriftBackend::direct);
    CHECK(!p.clamp_step.has_value());
    CHECK(p.kde.rule == KdeSpec::Bandwidth::silverman);
    CHECK(p.pair_cells == 24);
    CHECK(p.path_points == 21);
    CHECK(p.bench_reps == 3);
    CHECK(p.bench_direct_max == 20000);
    CHECK(p.order_p == 8);
    CHECK(!p.resume);
    CHECK(p.init.kind == "gaussian");
    CHECK(p.init.box_length == 10.0);
    CHECK(p.init.grid_n == 128);
    CHECK(!p.init.center.has_value());
    CHECK(!p.echo.empty());
}

TEST_CASE("resolve_plan flags bad input with the offending key") {
    std::string base =
        "n_particles = 16\nsigma = 0.2\ndt = 0.01\nepsilon = 0.05\nt_end = 0.1\n";

    auto miss = resolve_text(PlanKind::interacting_run, base + "init = gaussian\n");
    CHECK(has_issue(miss.issues, "output_dir"));

    std::string ok = base + "output_dir = /tmp/x\ninit = gaussian\n";

    CHECK(has_issue(resolve_text(PlanKind::interacting_run, ok + "frobnicate = 1\n").issues,
                    "frobnicate"));
    CHECK(has_issue(resolve_text(PlanKind::interacting_run, ok + "sweep_theta = 0.2, 1.0\n").issues,
                    "sweep_theta"));
    CHECK(has_issue(resolve_text(PlanKind::interacting_run, ok + "scheme = rk4\n").issues,
                    "scheme"));
    CHECK(has_issue(resolve_text(PlanKind::interacting_run, ok + "seeds = 5 5\n").issues,
                    "seeds"));
    CHECK(has_issue(resolve_text(PlanKind::interacting_run, ok + "kde = fixed\n").issues,
                    "kde_h"));
    CHECK(has_issue(resolve_text(PlanKind::interacting_run, ok + "grid_n = 48\n").issues,
                    "grid_n"));
    CHECK(has_issue(resolve_text(PlanKind::interacting_run, ok + "pair_cells = 40\n").issues,
                    "pair_cells"));
    CHECK(has_issue(resolve_text(PlanKind::interacting_run, ok + "center_x = 1\n").issues,
                    "center_x"));
    // particle runs start from a sampled law, never a grid field
    CHECK(has_issue(resolve_text(PlanKind::interacting_run,
                                 base + "output_dir = /tmp/x\ninit = eigenmode\n").issues,
                    "init"));
    // chaos comparisons are against the lamb_oseen solution only
    CHECK(has_issue(resolve_text(PlanKind::chaos_sweep,
                                 base + "output_dir = /tmp/x\ninit = gaussian\n").issues,
                    "init"));
    // pde runs start from a grid field, never a sampled cloud
    CHECK(has_issue(resolve_text(PlanKind::pde_run,
                                 base + "output_dir = /tmp/x\ninit = gaussian\n").issues,
                    "init"));
    CHECK(!has_issue(resolve_text(PlanKind::pde_run,
                                  base + "output_dir = /tmp/x\ninit = eigenmode\n").issues,
                     "init"));
    // checkpoint counts only make sense for the analytic-path kinds
    CHECK(has_issue(resolve_text(PlanKind::interacting_run, ok + "checkpoints = 5\n").issues,
                    "checkpoints"));
}

TEST_CASE("balance_check checkpoints expand to a uniform grid") {
    std::string text =
        "n_particles = 64\nsigma = 0.4\ndt = 0.01\nepsilon = 0.05\nt_end = 0.6\n"
        "output_dir = /tmp/x\ninit = lamb_oseen\ncheckpoints = 4\n";
    auto r = resolve_text(PlanKind::balance_check, text);
    CHECK(r.issues.empty());
    REQUIRE(r.plan.base.save_times.size() == 4);
    CHECK(r.plan.base.save_times[0] == 0.0);
    CHECK(r.plan.base.save_times[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(r.plan.base.save_times[3] == 0.6);

    // without the key the kind still gets a usable (11-point) default path
    auto d = resolve_text(PlanKind::balance_check,
                          "n_particles = 64\nsigma = 0.4\ndt = 0.01\nepsilon = 0.05\n"
                          "t_end = 0.6\noutput_dir = /tmp/x\ninit = lamb_oseen\n");
    CHECK(d.issues.empty());
    CHECK(d.plan.base.save_times.size() == 11);
}

TEST_CASE("martingale_sweep derives window and checkpoint lattice") {
    auto r = resolve_text(PlanKind::martingale_sweep,
                          "n_particles = 16\nsigma = 0.2\ndt = 0.01\nepsilon = 0.05\n"
                          "t_end = 1\noutput_dir = /tmp/x\ninit = gaussian\n");
    CHECK(r.issues.empty());
    CHECK(r.plan.window_s == 0.5);
    CHECK(r.plan.window_t == 1.0);
    // s/2 for the observation, then 9 equispaced quadrature nodes on [s, t]
    const auto& ts = r.plan.base.save_times;
    REQUIRE(ts.size() == 10);
    CHECK(ts.front() == 0.25);
    CHECK(ts[1] == 0.5);
    CHECK(ts.back() == 1.0);
    for (size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);

    auto bad = resolve_text(PlanKind::martingale_sweep,
                            "n_particles = 16\nsigma = 0.2\ndt = 0.01\nepsilon = 0.05\n"
                            "t_end = 1\noutput_dir = /tmp/x\ninit = gaussian\n"
                            "window_s = 0.8\nwindow_t = 0.4\n");
    CHECK(has_issue(bad.issues, "window_s"));
}

TEST_CASE("interacting plan writes the full artifact set") {
    std::string dir = fresh_dir("mini");
    auto r = resolve_text(PlanKind::interacting_run,
                          "n_particles = 16\nsigma = 0.2\ndt = 0.01\nepsilon = 0.05\n"
                          "t_end = 0\noutput_dir = " + dir + "\ninit = gaussian\n"
                          "seeds = 42\n");
    REQUIRE(r.issues.empty());
    PlanResult res = run_plan(r.plan);
    CHECK(res.runs_total == 1);
    CHECK(res.runs_failed == 0);
    CHECK(res.runs_skipped == 0);

    std::string key = run_key(16, 0.05, 0.01, 0.5, 42);
    CHECK(fs::exists(dir + "/plan.json"));
    CHECK(fs::exists(dir + "/runs/" + key + "/done"));
    CHECK(fs::exists(dir + "/runs/" + key + "/reports.ndjson"));

    // t_end = 0 still yields the initial checkpoint: one functional + summary
    std::string nd = slurp(dir + "/reports.ndjson");
    CHECK(count_kind(nd, "functional") == 1);
    CHECK(count_kind(nd, "summary") == 1);
    auto srow = nlohmann::json::parse(lines_of(nd).back());
    CHECK(srow.at("kind") == "summary");
    CHECK(srow.at("key") == key);
    CHECK(srow.at("N") == 16);
    CHECK(srow.at("scalars").contains("entropy_H"));
    CHECK(srow.at("scalars").contains("min_pair_dist"));

    auto csv = lines_of(slurp(dir + "/summary.csv"));
    REQUIRE(!csv.empty());
    CHECK(csv[0] == "metric,N,seed,value");
    bool saw_entropy = false;
    for (const auto& line : csv)
        if (line.rfind("entropy_H,16,42,", 0) == 0) saw_entropy = true;
    CHECK(saw_entropy);

    auto pj = nlohmann::json::parse(slurp(dir + "/plan.json"));
    CHECK(pj.at("kind") == "interacting_run");
    CHECK(pj.at("base").at("n_particles") == 16);
    CHECK(pj.contains("martingale_catalogue"));
    // resume is a session flag, not part of the plan identity
    CHECK(!pj.contains("resume"));
    fs::remove_all(dir);
}

TEST_CASE("failed runs leave error.txt and stay out of the aggregate") {
    std::string dir = fresh_dir("fail");
    // lamb_oseen cloud needs sigma > 0; resolve passes, the run itself throws
    auto r = resolve_text(PlanKind::interacting_run,
                          "n_particles = 16\nsigma = 0\ndt = 0.01\nepsilon = 0.05\n"
                          "t_end = 0\noutput_dir = " + dir + "\ninit = lamb_oseen\n");
    REQUIRE(r.issues.empty());
    PlanResult res = run_plan(r.plan);
    CHECK(res.runs_total == 1);
    CHECK(res.runs_failed == 1);
    REQUIRE(res.failed_keys.size() == 1);
    std::string key = res.failed_keys[0];
    CHECK(fs::exists(dir + "/runs/" + key + "/error.txt"));
    CHECK(!fs::exists(dir + "/runs/" + key + "/done"));
    CHECK(slurp(dir + "/reports.ndjson").empty());
    CHECK(slurp(dir + "/summary.csv") == "metric,N,seed,value\n");
    fs::remove_all(dir);
}

TEST_CASE("summarize_reports is a pure function of the ndjson bytes") {
    std::string nd =
        "{\"kind\":\"functional\",\"key\":\"kX\",\"N\":10,\"seed\":1,\"time\":0.0}\n"
        "{\"kind\":\"summary\",\"key\":\"kB\",\"N\":20,\"seed\":2,"
        "\"scalars\":{\"b_metric\":2.5,\"a_metric\":-1.0}}\n"
        "{\"kind\":\"summary\",\"key\":\"kA\",\"N\":10,\"seed\":1,"
        "\"scalars\":{\"a_metric\":0.5}}\n";
    std::string expect =
        "metric,N,seed,value\n"
        "a_metric,10,1,0.5\n"
        "a_metric,20,2,-1\n"
        "b_metric,20,2,2.5\n";
    CHECK(summarize_reports(nd) == expect);
    CHECK(summarize_reports(nd) == summarize_reports(nd));
    CHECK(summarize_reports("") == "metric,N,seed,value\n");
}

TEST_CASE("chaos sweep keeps per-run dirs plus one shared reference") {
    std::string dir = fresh_dir("chaos");
    auto r = resolve_text(PlanKind::chaos_sweep,
                          "n_particles = 24\nsigma = 0.4\ndt = 0.05\nepsilon = 0.05\n"
                          "t_end = 0.2\noutput_dir = " + dir + "\ninit = lamb_oseen\n"
                          "gamma = 1\nt0 = 1\nbox_length = 10\ngrid_n = 32\n"
                          "sweep_n = 24, 48\nseeds = 1, 2\nkde_cells = 32\n"
                          "pair_cells = 8\n");
    REQUIRE(r.issues.empty());
    PlanResult res = run_plan(r.plan);
    CHECK(res.runs_total == 4);
    CHECK(res.runs_failed == 0);

    CHECK(fs::exists(dir + "/reference/done"));
    VorticityField ref = load_field(dir + "/reference/field");
    CHECK(ref.time == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(ref.n == 32);

    for (int n : {24, 48})
        for (std::uint64_t s : {1u, 2u}) {
            std::string rd = dir + "/runs/" + run_key(n, 0.05, 0.05, 0.5, s);
            CHECK(fs::exists(rd + "/done"));
            CHECK(fs::exists(rd + "/final_snapshot.csv"));
        }

    std::string nd = slurp(dir + "/reports.ndjson");
    CHECK(count_kind(nd, "chaos") == 4);
    CHECK(count_kind(nd, "functional") == 4);
    CHECK(count_kind(nd, "summary") == 4);

    // summary rows sorted by (metric, N, seed); spot the chaos block order
    std::vector<std::string> l1_rows;
    for (const auto& line : lines_of(slurp(dir + "/summary.csv")))
        if (line.rfind("l1_empirical_vs_pde,", 0) == 0) l1_rows.push_back(line);
    REQUIRE(l1_rows.size() == 4);
    CHECK(l1_rows[0].rfind("l1_empirical_vs_pde,24,1,", 0) == 0);
    CHECK(l1_rows[1].rfind("l1_empirical_vs_pde,24,2,", 0) == 0);
    CHECK(l1_rows[2].rfind("l1_empirical_vs_pde,48,1,", 0) == 0);
    CHECK(l1_rows[3].rfind("l1_empirical_vs_pde,48,2,", 0) == 0);
    for (const auto& row : l1_rows) {
        double v = std::stod(row.substr(row.rfind(',') + 1));
        CHECK(v > 0.0);
        CHECK(v < 2.0);
    }
    fs::remove_all(dir);
}

TEST_CASE("resume reruns only unfinished work and reproduces the bytes") {
    std::string conf =
        "n_particles = 32\nsigma = 0.3\ndt = 0.05\nepsilon = 0.05\nt_end = 0.1\n"
        "init = gaussian\nsweep_n = 32, 64\nseeds = 3, 4\nkde_cells = 32\n";

    std::string dir_a = fresh_dir("resume_a");
    auto ra = resolve_text(PlanKind::interacting_run, conf + "output_dir = " + dir_a + "\n");
    REQUIRE(ra.issues.empty());
    run_plan(ra.plan);
    std::string reports_a = slurp(dir_a + "/reports.ndjson");
    std::string summary_a = slurp(dir_a + "/summary.csv");
    CHECK(count_kind(reports_a, "summary") == 4);

    // simulate a crash: one run loses its done marker and gains debris
    std::string dir_b = fresh_dir("resume_b");
    auto rb = resolve_text(PlanKind::interacting_run, conf + "output_dir = " + dir_b + "\n");
    REQUIRE(rb.issues.empty());
    run_plan(rb.plan);
    std::string broken = dir_b + "/runs/" + run_key(64, 0.05, 0.05, 0.5, 3);
    fs::remove(broken + "/done");
    std::ofstream(broken + "/partial.tmp") << "junk";

    rb.plan.resume = true;
    PlanResult res = run_plan(rb.plan);
    CHECK(res.runs_total == 4);
    CHECK(res.runs_skipped == 3);
    CHECK(res.runs_failed == 0);
    CHECK(!fs::exists(broken + "/partial.tmp"));
    CHECK(slurp(dir_b + "/reports.ndjson") == reports_a);
    CHECK(slurp(dir_b + "/summary.csv") == summary_a);

    // worker count must never leak into the outputs
    std::string dir_c = fresh_dir("resume_c");
    auto rc = resolve_text(PlanKind::interacting_run, conf + "output_dir = " + dir_c + "\n");
    REQUIRE(rc.issues.empty());
    setenv("VORTEX_THREADS", "3", 1);
    run_plan(rc.plan);
    unsetenv("VORTEX_THREADS");
    CHECK(slurp(dir_c + "/reports.ndjson") == reports_a);
    CHECK(slurp(dir_c + "/summary.csv") == summary_a);

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    fs::remove_all(dir_c);
}

TEST_CASE("pde plan emits monitors, checkpoint fields and the decay scalar") {
    std::string dir = fresh_dir("pde");
    auto r = resolve_text(PlanKind::pde_run,
                          "n_particles = 16\nsigma = 0.2\ndt = 0.05\nepsilon = 0\n"
                          "t_end = 0.1\nsave_times = 0.05, 0.1\n"
                          "output_dir = " + dir + "\ninit = eigenmode\n"
                          "gamma = 1\nbox_length = 1\ngrid_n = 16\n");
    REQUIRE(r.issues.empty());
    PlanResult res = run_plan(r.plan);
    CHECK(res.runs_failed == 0);

    std::string rd = dir + "/runs/" + run_key(16, 0.0, 0.05, 0.5, 0);
    CHECK(fs::exists(rd + "/field_t0.05.bin"));
    CHECK(fs::exists(rd + "/field_t0.1.json"));
    auto mon = lines_of(slurp(rd + "/monitors.csv"));
    CHECK(mon[0] == "time,l1,l2,l4,linf,mean,enstrophy,dissipation_integral,u_max,cfl");
    CHECK(mon.size() == 4); // header + steps 0, 0.05, 0.1

    std::string nd = slurp(dir + "/reports.ndjson");
    CHECK(count_kind(nd, "monitor") == 3);
    auto csv = slurp(dir + "/summary.csv");
    CHECK(csv.find("eigen_rel_err,16,0,") != std::string::npos);
    CHECK(csv.find("enstrophy_residual,16,0,") != std::string::npos);
    CHECK(csv.find("max_lp_increase,16,0,") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("balance plan reports the entropy budget") {
    std::string dir = fresh_dir("balance");
    auto r = resolve_text(PlanKind::balance_check,
                          "n_particles = 256\nsigma = 0.45\ndt = 0.005\nepsilon = 0.05\n"
                          "t_end = 0.3\noutput_dir = " + dir + "\ninit = lamb_oseen\n"
                          "gamma = 1\nt0 = 1\nbox_length = 10\ngrid_n = 32\n"
                          "checkpoints = 4\npath_points = 7\nkde_cells = 48\n");
    REQUIRE(r.issues.empty());
    PlanResult res = run_plan(r.plan);
    CHECK(res.runs_failed == 0);

    std::string nd = slurp(dir + "/reports.ndjson");
    CHECK(count_kind(nd, "functional") == 4);
    CHECK(count_kind(nd, "balance") == 1);
    for (const auto& line : lines_of(nd)) {
        auto j = nlohmann::json::parse(line);
        if (j.at("kind") != "balance") continue;
        CHECK(j.at("H_path").size() == 4);
        CHECK(j.contains("residual"));
    }
    auto csv = slurp(dir + "/summary.csv");
    CHECK(csv.find("balance_residual,256,0,") != std::string::npos);
    CHECK(csv.find("entropy_drop,256,0,") != std::string::npos);
    std::string key = run_key(256, 0.05, 0.005, 0.5, 0);
    CHECK(fs::exists(dir + "/runs/" + key + "/final_snapshot.csv"));
    fs::remove_all(dir);
}

TEST_CASE("bench plan writes the timing table with a direct cross-check") {
    std::string dir = fresh_dir("bench");
    auto r = resolve_text(PlanKind::nbody_bench,
                          "n_particles = 16\nsigma = 0.2\ndt = 0.01\nepsilon = 0.001\n"
                          "t_end = 0\noutput_dir = " + dir + "\ninit = gaussian\n"
                          "sweep_n = 200\nseeds = 11\nbench_reps = 1\n");
    REQUIRE(r.issues.empty());
    PlanResult res = run_plan(r.plan);
    CHECK(res.runs_failed == 0);

    std::string key = run_key(200, 0.001, 0.01, 0.5, 11);
    auto rows = lines_of(slurp(dir + "/runs/" + key + "/bench.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "backend,N,theta,p,epsilon,seconds,rel_err");
    CHECK(rows[1].rfind("tree,200,0.5,8,0.001,", 0) == 0);
    CHECK(rows[2].rfind("direct,200,0.5,8,0.001,", 0) == 0);
    CHECK(rows[2].substr(rows[2].rfind(',')) == ",0");

    // plan-level table is the concatenation of the per-run ones
    auto agg = lines_of(slurp(dir + "/bench.csv"));
    REQUIRE(agg.size() == 3);
    CHECK(agg[1] == rows[1]);
    CHECK(agg[2] == rows[2]);

    // the timing table is the only place wall-clock seconds appear
    std::string nd = slurp(dir + "/reports.ndjson");
    CHECK(nd.find("seconds") == std::string::npos);
    for (const auto& line : lines_of(nd)) {
        auto j = nlohmann::json::parse(line);
        if (j.at("kind") != "bench") continue;
        CHECK(j.at("have_direct") == true);
        CHECK(j.at("tree_rel_err").get<double>() < 1e-3);
    }
    CHECK(slurp(dir + "/summary.csv").find("tree_rel_err,200,11,") != std::string::npos);
    fs::remove_all(dir);
}
