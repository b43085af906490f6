#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "vortexlab/geometry.hpp"

namespace vlab {

// Particle state of the interacting system. Circulations are fixed at
// sampling time and never change; positions evolve. seed plus step_index
// identify the counter-based noise streams, so a snapshot fully determines
// every future random draw.
struct VortexEnsemble {
    std::vector<double> circulations;
    std::vector<Vec2> positions;
    double time = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t step_index = 0;

    int n() const { return int(positions.size()); }

    // circulation bound, finite positions, matching array sizes
    void validate(double circulation_bound_a) const;
};

// Snapshot format: one JSON metadata line, then "i,m,x,y" CSV rows.
// Doubles are written in shortest round-trip form, so identical states
// produce identical bytes.
void save_ensemble(const VortexEnsemble& e, double sigma, double epsilon,
                   const std::string& path);
VortexEnsemble load_ensemble(const std::string& path, double* sigma_out = nullptr,
                             double* epsilon_out = nullptr);

// (1/N) * sum_i (1 + |X_i|^2)^(k/2); requires k in (0, 2).
double moment_mk(const VortexEnsemble& e, double k);

// Exact minimum over all pairs; plane sweep, O(N log N).
double min_pair_distance(const VortexEnsemble& e);

} // namespace vlab
