#include <cmath>
#include <cstddef>

#include "vortexlab/diagnostics.hpp"
#include "vortexlab/errors.hpp"
#include "vortexlab/nbody.hpp"
#include "vortexlab/textio.hpp"

namespace vlab {

double TestFunction::value(Vec2 x) const {
    if (kind == Kind::gaussian) return std::exp(-norm2(x - center) / (a * a));
    return std::cos(dot(wave, x) + phase);
}

Vec2 TestFunction::grad(Vec2 x) const {
    if (kind == Kind::gaussian) {
        Vec2 d = x - center;
        return (-2.0 / (a * a) * value(x)) * d;
    }
    return -std::sin(dot(wave, x) + phase) * wave;
}

double TestFunction::laplacian(Vec2 x) const {
    if (kind == Kind::gaussian) {
        double r2 = norm2(x - center);
        return value(x) * (4.0 * r2 / (a * a * a * a) - 4.0 / (a * a));
    }
    return -norm2(wave) * value(x);
}

double circulation_weight(double m) { return std::exp(-0.5 * m * m); }

int martingale_catalogue_version() { return 1; }

MartingaleSpec default_martingale_spec(double s, double t, double epsilon) {
    MartingaleSpec spec;
    spec.s = s;
    spec.t = t;
    spec.epsilon = epsilon;
    if (s > 0.0) {
        TestFunction obs;
        obs.kind = TestFunction::Kind::gaussian;
        obs.a = 2.0;
        spec.obs_times = {0.5 * s};
        spec.obs = {obs};
    }
    spec.phi.kind = TestFunction::Kind::trig;
    spec.phi.wave = {1.0, 0.7};
    spec.phi.phase = 0.3;
    return spec;
}

namespace {

std::size_t checkpoint_index(const TrajectoryStore& store, double t,
                             const char* what) {
    for (std::size_t c = 0; c < store.times.size(); ++c)
        if (std::abs(store.times[c] - t) <= 1e-9) return c;
    throw SimError(std::string("no checkpoint at the ") + what + " time " +
                   format_double(t));
}

} // namespace

double martingale_residual(const TrajectoryStore& store,
                           const MartingaleSpec& spec) {
    store.validate();
    if (spec.obs.size() != spec.obs_times.size())
        throw SimError("observable list and time list disagree in length");
    if (!(spec.s < spec.t)) throw SimError("window needs s < t");
    for (std::size_t l = 0; l < spec.obs_times.size(); ++l) {
        if (!(spec.obs_times[l] < spec.s))
            throw SimError("observable times must precede the window");
        if (l > 0 && !(spec.obs_times[l - 1] < spec.obs_times[l]))
            throw SimError("observable times must increase");
    }
    std::size_t cs = checkpoint_index(store, spec.s, "window-start");
    std::size_t ct = checkpoint_index(store, spec.t, "window-end");

    const VortexEnsemble& first = store.snapshots.front();
    int n = first.n();
    double nu = store.config.nu();

    std::vector<double> pref(n);
    for (int i = 0; i < n; ++i) pref[i] = circulation_weight(first.circulations[i]);
    for (std::size_t l = 0; l < spec.obs.size(); ++l) {
        const VortexEnsemble& e =
            store.snapshots[checkpoint_index(store, spec.obs_times[l], "observable")];
        for (int i = 0; i < n; ++i) pref[i] *= spec.obs[l].value(e.positions[i]);
    }

    // trapezoid over checkpoints of u_eps . grad phi + nu lap phi
    std::vector<double> integral(n, 0.0);
    KernelSpec kernel{spec.epsilon};
    for (std::size_t c = cs; c <= ct; ++c) {
        const VortexEnsemble& e = store.snapshots[c];
        double wleft = c > cs ? 0.5 * (store.times[c] - store.times[c - 1]) : 0.0;
        double wright = c < ct ? 0.5 * (store.times[c + 1] - store.times[c]) : 0.0;
        double wt = wleft + wright;
        std::vector<Vec2> vel;
        if (spec.include_interaction) vel = direct_drift(e, kernel);
        for (int i = 0; i < n; ++i) {
            double b = nu * spec.phi.laplacian(e.positions[i]);
            if (spec.include_interaction) b += dot(vel[i], spec.phi.grad(e.positions[i]));
            integral[i] += wt * b;
        }
    }

    const VortexEnsemble& es = store.snapshots[cs];
    const VortexEnsemble& et = store.snapshots[ct];
    double f = 0.0;
    for (int i = 0; i < n; ++i)
        f += pref[i] * (spec.phi.value(et.positions[i]) -
                        spec.phi.value(es.positions[i]) - integral[i]);
    return f / n;
}

} // namespace vlab
