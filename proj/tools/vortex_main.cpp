#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vortexlab/config.hpp"
#include "vortexlab/errors.hpp"
#include "vortexlab/plan.hpp"

namespace {

int run_kind(vlab::PlanKind kind, const std::string& config_path,
             const std::vector<std::string>& sets, bool resume, bool check) {
    std::vector<vlab::ConfigIssue> issues;
    vlab::ConfigMap map = vlab::ConfigMap::parse_file(config_path, issues);
    if (!issues.empty()) {
        std::fputs(vlab::format_issues(issues).c_str(), stderr);
        return 2;
    }
    std::vector<std::string> overrides;
    for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::fprintf(stderr, "bad --set '%s', expected key=value\n", kv.c_str());
            return 2;
        }
        map.set_override(kv.substr(0, eq), kv.substr(eq + 1));
        overrides.push_back(kv);
    }
    vlab::ExperimentPlan plan = vlab::resolve_plan(kind, map, issues);
    if (!issues.empty()) {
        std::fputs(vlab::format_issues(issues).c_str(), stderr);
        return 2;
    }
    plan.resume = resume;
    plan.overrides = overrides;
    if (check) {
        for (const auto& line : plan.echo) std::printf("%s\n", line.c_str());
        std::printf("config ok: %d runs\n",
                    int(plan.n_list.size() * plan.epsilon_list.size() *
                        plan.dt_list.size() * plan.theta_list.size() *
                        plan.seeds.size()));
        return 0;
    }
    vlab::PlanResult res = vlab::run_plan(plan);
    std::printf("%s: %d runs, %d skipped, %d failed -> %s\n",
                vlab::plan_kind_name(plan.kind).c_str(), res.runs_total,
                res.runs_skipped, res.runs_failed, plan.output_dir.c_str());
    for (const auto& k : res.failed_keys)
        std::fprintf(stderr, "failed: %s (see runs/%s/error.txt)\n", k.c_str(),
                     k.c_str());
    return res.runs_failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vortex: particle, spectral and mean-field runs of the "
                 "2D viscous vortex model"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        vlab::PlanKind kind;
        const char* help;
    };
    const Sub subs[] = {
        {"run", vlab::PlanKind::interacting_run, "interacting particle run"},
        {"pde", vlab::PlanKind::pde_run, "spectral vorticity run"},
        {"meanfield", vlab::PlanKind::mean_field_run, "independent-copy mean-field run"},
        {"sweep", vlab::PlanKind::chaos_sweep, "chaos metrics over an N sweep"},
        {"bench", vlab::PlanKind::nbody_bench, "tree vs direct drift benchmark"},
        {"balance", vlab::PlanKind::balance_check, "entropy balance on the mean-field run"},
        {"martingale", vlab::PlanKind::martingale_sweep, "path-functional residual sweep"},
    };

    std::string config;
    std::vector<std::string> sets;
    bool resume = false;
    bool check = false;
    for (const Sub& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name, s.help);
        sc->add_option("--config", config, "key = value config file")->required();
        sc->add_option("--set", sets, "override, key=value (repeatable)");
        sc->add_flag("--resume", resume, "skip runs with a done marker");
        sc->add_flag("--check", check, "validate and echo the config, run nothing");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad usage counts as a config error
    }

    vlab::PlanKind kind = subs[0].kind;
    for (const Sub& s : subs)
        if (app.get_subcommand(s.name)->parsed()) kind = s.kind;

    try {
        return run_kind(kind, config, sets, resume, check);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
}
