#include "vortexlab/rng.hpp"

#include <cmath>

namespace vlab::rng {

namespace {

// Philox 4x32 round constants (the standard ones).
constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
    std::uint64_t p = std::uint64_t(a) * b;
    hi = std::uint32_t(p >> 32);
    lo = std::uint32_t(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMult0, ctr[0], hi0, lo0);
        mulhilo(kMult1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::array<std::uint32_t, 4> draw_block(std::uint64_t seed, Domain domain,
                                        std::uint64_t stream, std::uint64_t step,
                                        std::uint32_t slot) {
    // stream gets 48 bits; domain and slot pack into the top word.
    std::array<std::uint32_t, 4> ctr = {
        std::uint32_t(step),
        std::uint32_t(step >> 32),
        std::uint32_t(stream),
        std::uint32_t((stream >> 32) & 0xFFFFu) |
            (std::uint32_t(domain) << 16) | (slot << 24),
    };
    std::array<std::uint32_t, 2> key = {std::uint32_t(seed),
                                        std::uint32_t(seed >> 32)};
    return philox4x32(ctr, key);
}

namespace {

// 53-bit uniform from two words; (0,1] when shifted=true else [0,1).
inline double to_u01(std::uint32_t a, std::uint32_t b, bool open_at_zero) {
    std::uint64_t v = (std::uint64_t(a) << 21) ^ (std::uint64_t(b) >> 11);
    v &= (std::uint64_t(1) << 53) - 1;
    if (open_at_zero) v += 1; // (0, 2^53]
    return double(v) * 0x1.0p-53;
}

} // namespace

std::array<double, 2> uniform_pair(std::uint64_t seed, Domain domain,
                                   std::uint64_t stream, std::uint64_t step,
                                   std::uint32_t slot) {
    auto w = draw_block(seed, domain, stream, step, slot);
    return {to_u01(w[0], w[1], true), to_u01(w[2], w[3], false)};
}

double uniform01(std::uint64_t seed, Domain domain, std::uint64_t stream,
                 std::uint64_t step, std::uint32_t slot) {
    auto w = draw_block(seed, domain, stream, step, slot);
    return to_u01(w[0], w[1], false);
}

Vec2 normal_pair(std::uint64_t seed, Domain domain, std::uint64_t stream,
                 std::uint64_t step, std::uint32_t slot) {
    auto u = uniform_pair(seed, domain, stream, step, slot);
    double r = std::sqrt(-2.0 * std::log(u[0]));
    double t = 2.0 * M_PI * u[1];
    return {r * std::cos(t), r * std::sin(t)};
}

} // namespace vlab::rng
