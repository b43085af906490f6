#include <benchmark/benchmark.h>

#include "vortexlab/circulation.hpp"
#include "vortexlab/estimators.hpp"
#include "vortexlab/field.hpp"
#include "vortexlab/nbody.hpp"
#include "vortexlab/quadtree.hpp"
#include "vortexlab/spectral.hpp"

namespace {

vlab::VortexEnsemble cloud(int n) {
    auto law = vlab::gaussian_law(1.0, {5.0, 5.0}, 0.4);
    return vlab::sample_ensemble(law, n, 7);
}

void bm_direct_drift(benchmark::State& state) {
    auto e = cloud(int(state.range(0)));
    vlab::KernelSpec k{1e-3};
    for (auto _ : state) benchmark::DoNotOptimize(vlab::direct_drift(e, k));
}
BENCHMARK(bm_direct_drift)->Arg(1000)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond);

void bm_tree_drift(benchmark::State& state) {
    auto e = cloud(int(state.range(0)));
    vlab::KernelSpec k{1e-3};
    for (auto _ : state) {
        auto tree = vlab::build_tree(e);
        benchmark::DoNotOptimize(vlab::tree_drift(tree, e, 0.5, k));
    }
}
BENCHMARK(bm_tree_drift)->Arg(1000)->Arg(16000)->Arg(64000)->Unit(benchmark::kMillisecond);

void bm_spectral_step(benchmark::State& state) {
    int n = int(state.range(0));
    auto w0 = vlab::random_smooth_field(2.0 * M_PI, n, 4, 1.0, 11);
    vlab::SpectralState s(w0, 0.01, vlab::KernelNorm::vortex);
    for (auto _ : state) benchmark::DoNotOptimize(s.step(1e-3));
}
BENCHMARK(bm_spectral_step)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void bm_kde(benchmark::State& state) {
    auto e = cloud(int(state.range(0)));
    vlab::KdeSpec spec;
    for (auto _ : state) benchmark::DoNotOptimize(vlab::kde(e.positions, nullptr, spec));
}
BENCHMARK(bm_kde)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
