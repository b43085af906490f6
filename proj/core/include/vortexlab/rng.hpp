#pragma once
#include <array>
#include <cstdint>

#include "vortexlab/geometry.hpp"

// Counter-based random streams (Philox 4x32-10). Every draw is a pure
// function of (seed, domain, stream, step, slot), so results do not depend
// on evaluation order or thread count. `stream` is usually a particle
// index, `step` the integrator step, `domain` separates uses (initial
// sampling vs Brownian increments vs pair subsampling) so they never
// collide on the same counter.

namespace vlab::rng {

enum class Domain : std::uint32_t {
    init_atom = 0,       // which circulation atom a particle draws
    init_position = 1,   // position sample from the atom's density
    brownian = 2,        // per-step Gaussian increments
    pair_sample = 3,     // pair subsampling for distance moments
    scratch = 4,         // tests and one-off synthetic draws
};

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// Four raw 32-bit words for the given coordinates.
std::array<std::uint32_t, 4> draw_block(std::uint64_t seed, Domain domain,
                                        std::uint64_t stream, std::uint64_t step,
                                        std::uint32_t slot);

// Two independent uniforms; first lies in (0,1], second in [0,1).
// The half-open choices keep log() and Box-Muller safe.
std::array<double, 2> uniform_pair(std::uint64_t seed, Domain domain,
                                   std::uint64_t stream, std::uint64_t step,
                                   std::uint32_t slot = 0);

// One uniform in [0,1) with full 53-bit resolution.
double uniform01(std::uint64_t seed, Domain domain, std::uint64_t stream,
                 std::uint64_t step, std::uint32_t slot = 0);

// Standard bivariate normal via Box-Muller.
Vec2 normal_pair(std::uint64_t seed, Domain domain, std::uint64_t stream,
                 std::uint64_t step, std::uint32_t slot = 0);

} // namespace vlab::rng
