#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace fhn {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011 constants).
/// Stateless: each 128-bit counter / 64-bit key pair maps to four random
/// 32-bit words, so any draw in a simulation is addressable by index and can
/// be reproduced without replaying the stream.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

/// SplitMix64 finalizer; used to spread (seed, stream) into Philox keys.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
inline double to_unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Independent substream of Gaussian pairs, addressed by a 64-bit index.
///
/// Stream identity is (seed, stream_id) hashed into the Philox key; sample
/// trajectories use their trajectory index as stream_id, so substreams never
/// overlap and any (index, tag) draw is bit-reproducible in isolation.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t k = splitmix64(seed ^ splitmix64(stream_id + 0x632BE59BD9B4E019ull));
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    }

    /// Two independent standard normals from one Philox block via Box-Muller.
    /// The first normal of the pair is also well defined on its own, which is
    /// what keeps plain increments and correlated pairs consistent.
    std::pair<double, double> normal_pair(std::uint64_t index, std::uint32_t tag = 0) const {
        auto words = philox4x32({static_cast<std::uint32_t>(index),
                                 static_cast<std::uint32_t>(index >> 32), tag, 0u},
                                key_);
        std::uint64_t b0 = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
        std::uint64_t b1 = (static_cast<std::uint64_t>(words[2]) << 32) | words[3];
        double u1 = to_unit_double(b0);
        double u2 = to_unit_double(b1);
        // 1 - u1 lies in (0, 1], keeping the log finite.
        double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        double theta = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

private:
    std::array<std::uint32_t, 2> key_;
};

}  // namespace fhn
