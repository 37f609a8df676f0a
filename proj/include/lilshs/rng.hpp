#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lilshs {

/// Philox-4x32-10 counter-based generator (Salmon et al., SC 2011).
/// A pure function (counter, key) -> 128 random bits: no state, so any
/// (path, mode, step) address can be evaluated independently on any thread
/// with identical results.
struct Philox4x32 {
    static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85u;
    static constexpr std::uint32_t kMulA = 0xD2511F53u;
    static constexpr std::uint32_t kMulB = 0xCD9E8D57u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) noexcept {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(kMulA) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(kMulB) * ctr[2];
            const std::array<std::uint32_t, 4> next = {
                std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0],
                std::uint32_t(p1),
                std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
                std::uint32_t(p0),
            };
            ctr = next;
            key[0] += kWeylA;
            key[1] += kWeylB;
        }
        return ctr;
    }
};

struct GaussPair {
    double g0, g1;
};

/// Addressed source of standard normal pairs: one pair per step index of one
/// (seed, path, mode) stream. Identical addresses give identical values
/// regardless of scheduling, so checkpointing and thread count never perturb
/// a trajectory. Numerical paths consume the first component of each step's
/// pair as their Brownian increment (dbeta = sqrt(tau) * g0); the exact
/// sampler consumes both.
class NoiseStream {
public:
    /// Stream addresses are 32-bit: path and mode both live in the counter
    /// block next to the 64-bit step index.
    NoiseStream(std::uint64_t seed, std::uint32_t path, std::uint32_t mode) noexcept
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, path_(path), mode_(mode) {}

    GaussPair normal_pair(std::uint64_t step) const noexcept {
        const auto w = words(step);
        const double r = std::sqrt(-2.0 * std::log(unit_open(w[0], w[1])));
        const double phase = k2Pi * unit_open(w[2], w[3]);
        return {r * std::cos(phase), r * std::sin(phase)};
    }

    /// First component only (skips the sine branch).
    double normal_first(std::uint64_t step) const noexcept {
        const auto w = words(step);
        const double r = std::sqrt(-2.0 * std::log(unit_open(w[0], w[1])));
        return r * std::cos(k2Pi * unit_open(w[2], w[3]));
    }

    double increment(std::uint64_t step, double sqrt_tau) const noexcept {
        return sqrt_tau * normal_first(step);
    }

    /// Uniform in (0,1), one per step sub-slot (slot 0 or 1).
    double uniform(std::uint64_t step, int slot) const noexcept {
        const auto w = words(step);
        return slot == 0 ? unit_open(w[0], w[1]) : unit_open(w[2], w[3]);
    }

private:
    std::array<std::uint32_t, 4> words(std::uint64_t step) const noexcept {
        return Philox4x32::block(
            {std::uint32_t(step), std::uint32_t(step >> 32), path_, mode_}, key_);
    }

    // 53-bit mantissa from two words, offset to stay strictly inside (0,1).
    static double unit_open(std::uint32_t hi, std::uint32_t lo) noexcept {
        const std::uint64_t bits = (std::uint64_t(hi) << 21) | (std::uint64_t(lo) >> 11);
        return (double(bits) + 0.5) * 0x1.0p-53;
    }

    static constexpr double k2Pi = 6.283185307179586476925286766559;

    std::array<std::uint32_t, 2> key_;
    std::uint32_t path_;
    std::uint32_t mode_;
};

}  // namespace lilshs
