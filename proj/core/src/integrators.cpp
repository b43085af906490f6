#include "vortexlab/integrators.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "vortexlab/errors.hpp"
#include "vortexlab/nbody.hpp"
#include "vortexlab/parallel.hpp"
#include "vortexlab/rng.hpp"
#include "vortexlab/textio.hpp"

namespace vlab {

void TrajectoryStore::validate() const {
    if (times.size() != snapshots.size())
        throw SimError("trajectory times and snapshots disagree in length");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw SimError("trajectory checkpoint times must be strictly increasing");
    for (std::size_t i = 1; i < snapshots.size(); ++i)
        if (snapshots[i].circulations != snapshots[0].circulations)
            throw SimError("circulations changed between checkpoints");
}

void save_store(const TrajectoryStore& s, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json meta;
    meta["n_particles"] = s.config.n_particles;
    meta["sigma"] = s.config.sigma;
    meta["nu"] = s.config.nu();
    meta["moment_order_k"] = s.config.moment_order_k;
    meta["circulation_bound_a"] = s.config.circulation_bound_a;
    meta["dt"] = s.config.dt;
    meta["t_end"] = s.config.t_end;
    meta["epsilon"] = s.config.epsilon;
    meta["seed"] = s.config.seed;
    meta["times"] = s.times;
    meta["clamp_events"] = s.clamp_events;
    std::ofstream mf(dir + "/metadata.json");
    if (!mf) throw SimError("cannot write " + dir + "/metadata.json");
    mf << meta.dump(2) << "\n";
    char name[32];
    for (std::size_t i = 0; i < s.snapshots.size(); ++i) {
        std::snprintf(name, sizeof(name), "/snap_%04zu.csv", i);
        save_ensemble(s.snapshots[i], s.config.sigma, s.config.epsilon, dir + name);
    }
}

TrajectoryStore load_store(const std::string& dir) {
    std::ifstream mf(dir + "/metadata.json");
    if (!mf) throw SimError("cannot read " + dir + "/metadata.json");
    nlohmann::json meta = nlohmann::json::parse(mf);
    TrajectoryStore s;
    s.config.n_particles = meta.at("n_particles").get<int>();
    s.config.sigma = meta.at("sigma").get<double>();
    s.config.moment_order_k = meta.at("moment_order_k").get<double>();
    s.config.circulation_bound_a = meta.at("circulation_bound_a").get<double>();
    s.config.dt = meta.at("dt").get<double>();
    s.config.t_end = meta.at("t_end").get<double>();
    s.config.epsilon = meta.at("epsilon").get<double>();
    s.config.seed = meta.at("seed").get<std::uint64_t>();
    s.times = meta.at("times").get<std::vector<double>>();
    s.clamp_events = meta.at("clamp_events").get<long long>();
    char name[32];
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        std::snprintf(name, sizeof(name), "/snap_%04zu.csv", i);
        s.snapshots.push_back(load_ensemble(dir + name));
    }
    s.validate();
    return s;
}

namespace {

std::vector<Vec2> eval_drift(const VortexEnsemble& e, const SimConfig& cfg,
                             const IntegratorSpec& spec) {
    KernelSpec kernel{cfg.epsilon};
    if (spec.backend == DriftBackend::direct) return direct_drift(e, kernel);
    QuadTree tree = build_tree(e, spec.leaf_capacity, spec.order_p);
    return tree_drift(tree, e, spec.theta, kernel);
}

// applies displacement + noise, enforcing the clamp on the drift part only
int apply_step(VortexEnsemble& e, const std::vector<Vec2>& disp, double sigma,
               double dt, const std::optional<double>& clamp) {
    int n = e.n();
    double noise_scale = sigma * std::sqrt(dt);
    std::vector<int> clamped(n, 0);
    parallel_for(n, [&](std::int64_t b, std::int64_t ee) {
        for (std::int64_t i = b; i < ee; ++i) {
            Vec2 d = disp[i];
            if (clamp) {
                double len = norm(d);
                if (len > *clamp) {
                    d *= *clamp / len;
                    clamped[i] = 1;
                }
            }
            Vec2 xi = rng::normal_pair(e.seed, rng::Domain::brownian, i, e.step_index);
            e.positions[i] += d + noise_scale * xi;
        }
    });
    e.time += dt;
    e.step_index += 1;
    int events = 0;
    for (int c : clamped) events += c;
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(e.positions[i].x) || !std::isfinite(e.positions[i].y))
            throw NonFiniteError("particle " + std::to_string(i) +
                                 " became non-finite at step " +
                                 std::to_string(e.step_index));
    return events;
}

} // namespace

int step_interacting(VortexEnsemble& e, const SimConfig& cfg,
                     const IntegratorSpec& spec, double dt) {
    if (!(dt > 0.0)) throw SimError("step width must be > 0");
    int n = e.n();
    std::vector<Vec2> disp(n);
    std::vector<Vec2> b1 = eval_drift(e, cfg, spec);
    if (spec.scheme == Scheme::euler_maruyama) {
        for (int i = 0; i < n; ++i) disp[i] = dt * b1[i];
    } else {
        // deterministic Heun on the drift: predict with b1, correct with
        // the drift at the predicted positions, then add the noise
        VortexEnsemble pred = e;
        for (int i = 0; i < n; ++i) pred.positions[i] += dt * b1[i];
        std::vector<Vec2> b2 = eval_drift(pred, cfg, spec);
        for (int i = 0; i < n; ++i) disp[i] = 0.5 * dt * (b1[i] + b2[i]);
    }
    return apply_step(e, disp, cfg.sigma, dt, spec.clamp_step);
}

namespace {

// shared stepping loop: advance with cfg.dt, clipping to hit each save
// time exactly; stepper(dt) must advance its state by dt
template <typename Stepper>
TrajectoryStore run_checkpointed(VortexEnsemble& e, const SimConfig& cfg,
                                 Stepper&& step) {
    TrajectoryStore store;
    store.config = cfg;
    auto snapshot = [&](double t) {
        store.times.push_back(t);
        store.snapshots.push_back(e);
    };
    std::vector<double> saves = cfg.save_times;
    // default checkpoint is the endpoint; for t_end = 0 that is the initial
    // state, so a zero-length run still yields one snapshot
    if (saves.empty()) saves.push_back(cfg.t_end);
    std::size_t next = 0;
    if (!saves.empty() && saves[0] == 0.0) {
        snapshot(0.0);
        ++next;
    }
    double t = 0.0;
    const double tiny = 1e-12 * std::max(1.0, cfg.t_end);
    while (t < cfg.t_end - tiny) {
        double target = next < saves.size() ? saves[next] : cfg.t_end;
        double dt = std::min(cfg.dt, target - t);
        step(dt);
        t += dt;
        if (next < saves.size() && t >= saves[next] - tiny) {
            t = saves[next]; // land exactly on the checkpoint lattice
            e.time = t;
            snapshot(saves[next]);
            ++next;
        } else {
            e.time = t;
        }
    }
    store.validate();
    return store;
}

} // namespace

TrajectoryStore run_interacting(const CirculationLaw& law, const SimConfig& cfg,
                                const IntegratorSpec& spec) {
    cfg.validate();
    VortexEnsemble e = sample_ensemble(law, cfg.n_particles, cfg.seed);
    e.validate(cfg.circulation_bound_a);
    long long clamps = 0;
    auto store = run_checkpointed(e, cfg, [&](double dt) {
        clamps += step_interacting(e, cfg, spec, dt);
    });
    store.clamp_events = clamps;
    return store;
}

TrajectoryStore run_mean_field(const CirculationLaw& law,
                               const std::vector<VorticityField>& w_path,
                               const SimConfig& cfg, const MeanFieldSpec& spec) {
    cfg.validate();
    if (w_path.empty()) throw SimError("mean-field run needs a vorticity path");
    const double slack = 1e-9;
    if (w_path.front().time > slack ||
        w_path.back().time < cfg.t_end - slack)
        throw SimError("vorticity path does not cover [0, t_end]");
    for (std::size_t i = 1; i < w_path.size(); ++i) {
        double gap = w_path[i].time - w_path[i - 1].time;
        if (!(gap > 0.0))
            throw SimError("vorticity path times must be strictly increasing");
        if (gap > spec.field_gap_tolerance + slack)
            throw SimError("vorticity path gap " + format_double(gap) +
                           " exceeds tolerance " +
                           format_double(spec.field_gap_tolerance));
    }

    std::vector<DriftField> fields;
    fields.reserve(w_path.size());
    for (const auto& w : w_path) fields.push_back(drift_from_field(w, spec.norm));

    // time-interpolated velocity at (t, x)
    auto velocity = [&](double t, Vec2 x) {
        std::size_t k = 0;
        while (k + 2 < w_path.size() && w_path[k + 1].time <= t) ++k;
        double t0 = w_path[k].time, t1 = w_path[k + 1].time;
        double a = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        Vec2 u0 = sample_drift(fields[k], x);
        Vec2 u1 = sample_drift(fields[k + 1], x);
        return (1.0 - a) * u0 + a * u1;
    };

    VortexEnsemble e = sample_ensemble(law, cfg.n_particles, cfg.seed);
    e.validate(cfg.circulation_bound_a);
    double noise_sigma = cfg.sigma;
    auto step = [&](double dt) {
        int n = e.n();
        double t = e.time;
        double noise_scale = noise_sigma * std::sqrt(dt);
        bool heun = spec.scheme == Scheme::srk_heun;
        parallel_for(n, [&](std::int64_t b, std::int64_t ee) {
            for (std::int64_t i = b; i < ee; ++i) {
                Vec2 x = e.positions[i];
                Vec2 u0 = velocity(t, x);
                Vec2 d;
                if (heun) {
                    Vec2 xp = x + dt * u0;
                    Vec2 u1 = velocity(t + dt, xp);
                    d = 0.5 * dt * (u0 + u1);
                } else {
                    d = dt * u0;
                }
                Vec2 xi = rng::normal_pair(e.seed, rng::Domain::brownian, i,
                                           e.step_index);
                e.positions[i] = x + d + noise_scale * xi;
            }
        });
        e.step_index += 1;
        e.time = t + dt;
    };
    if (w_path.size() == 1)
        throw SimError("vorticity path needs at least two fields to interpolate");
    return run_checkpointed(e, cfg, step);
}

} // namespace vlab
