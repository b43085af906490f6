#pragma once
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/circulation.hpp"
#include "vortexlab/config.hpp"
#include "vortexlab/ensemble.hpp"
#include "vortexlab/kernels.hpp"

namespace vlab {

enum class Scheme { euler_maruyama, srk_heun };
enum class DriftBackend { direct, tree };

// How one step advances: scheme for the drift part (noise is always the
// exact Gaussian increment), backend for evaluating the interaction.
// clamp_step, when set, rescales only the drift displacement; every
// rescue is counted, never silent.
struct IntegratorSpec {
    Scheme scheme = Scheme::euler_maruyama;
    DriftBackend backend = DriftBackend::direct;
    double theta = 0.5;
    int order_p = 8;
    int leaf_capacity = 16;
    std::optional<double> clamp_step;
};

// Checkpointed trajectory of one run. Snapshot times are strictly
// increasing and circulations identical across snapshots.
struct TrajectoryStore {
    SimConfig config;
    std::vector<double> times;
    std::vector<VortexEnsemble> snapshots;
    long long clamp_events = 0;

    void validate() const;
};

// Directory layout: metadata.json plus one snapshot CSV per checkpoint.
void save_store(const TrajectoryStore& s, const std::string& dir);
TrajectoryStore load_store(const std::string& dir);

// One interacting step of width dt. Returns the number of clamped drift
// displacements. Noise draws key off (seed, particle, step_index), so a
// reconstructed ensemble continues identically. Throws NonFiniteError
// when a position leaves the finite range.
int step_interacting(VortexEnsemble& e, const SimConfig& cfg,
                     const IntegratorSpec& spec, double dt);

// Samples N particles from the law and integrates to t_end, snapshotting
// at cfg.save_times (steps are clipped to land on them exactly).
TrajectoryStore run_interacting(const CirculationLaw& law, const SimConfig& cfg,
                                const IntegratorSpec& spec);

// Drift for the mean-field dynamics: the velocity of a prescribed
// vorticity path, linear in time between stored fields.
struct MeanFieldSpec {
    Scheme scheme = Scheme::euler_maruyama;
    KernelNorm norm = KernelNorm::vortex;
    double field_gap_tolerance = 0.25; // max spacing between path times
};

// N independent copies of the one-particle dynamics driven by w_path.
// Errors when the path leaves gaps wider than the tolerance or fails to
// cover [0, t_end].
TrajectoryStore run_mean_field(const CirculationLaw& law,
                               const std::vector<VorticityField>& w_path,
                               const SimConfig& cfg, const MeanFieldSpec& spec);

} // namespace vlab
