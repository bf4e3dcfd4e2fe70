#pragma once

#include <cmath>
#include <cstdint>

namespace increff {

// Philox-4x32-10 counter-based generator. Every random variate is a pure
// function of (seed, stream, slot, draw), so generation of disjoint row
// ranges is schedule-independent: the same dataset is produced no matter
// how the rows are split across threads.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    struct Block {
        std::uint32_t v[4];
    };

    static Block round10(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                         std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
        for (int r = 0; r < 10; ++r) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return Block{{c0, c1, c2, c3}};
    }
};

// One logical random stream, keyed by (seed, stream). Each draw is addressed
// by a (slot, draw) pair: `slot` identifies the random variable within the
// stream (e.g. one slot per column of a simulated row) and `draw` counts
// primitive uniforms consumed by that variable.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    // 64 uniform bits for (slot, draw).
    std::uint64_t bits(std::uint32_t slot, std::uint32_t draw) const {
        const auto b = Philox4x32::round10(
            static_cast<std::uint32_t>(stream_),
            static_cast<std::uint32_t>(stream_ >> 32), slot, draw,
            static_cast<std::uint32_t>(seed_),
            static_cast<std::uint32_t>(seed_ >> 32));
        return (static_cast<std::uint64_t>(b.v[0]) << 32) | b.v[1];
    }

    // Uniform on (0,1), never exactly 0 or 1.
    double uniform(std::uint32_t slot, std::uint32_t draw = 0) const {
        const std::uint64_t u = bits(slot, draw);
        return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform_range(double lo, double hi, std::uint32_t slot,
                         std::uint32_t draw = 0) const {
        return lo + (hi - lo) * uniform(slot, draw);
    }

    // Standard normal via Box-Muller; consumes draws (2*draw, 2*draw+1).
    double normal(std::uint32_t slot, std::uint32_t draw = 0) const {
        const double u1 = uniform(slot, 2 * draw);
        const double u2 = uniform(slot, 2 * draw + 1);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * M_PI * u2);
    }

    double exponential(double rate, std::uint32_t slot,
                       std::uint32_t draw = 0) const {
        return -std::log(uniform(slot, draw)) / rate;
    }

    // Student-t via the ratio definition Normal / sqrt(ChiSq(df)/df); the
    // chi-square is a sum of df squared normals from the same slot.
    double student_t(int df, std::uint32_t slot) const {
        const double z = normal(slot, 0);
        double chi2 = 0.0;
        for (int j = 0; j < df; ++j) {
            const double g = normal(slot, static_cast<std::uint32_t>(j + 1));
            chi2 += g * g;
        }
        return z / std::sqrt(chi2 / static_cast<double>(df));
    }

    // Draw an integer uniformly from [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound, std::uint32_t slot,
                        std::uint32_t draw = 0) const {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint32_t d = draw;
        std::uint64_t u = bits(slot, d);
        while (u >= limit) u = bits(slot, ++d);
        return u % bound;
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

// Deterministic Fisher-Yates shuffle of 0..n-1 driven by a CounterRng.
template <typename IndexVec>
void seeded_shuffle(IndexVec& idx, const CounterRng& rng) {
    const std::size_t n = idx.size();
    for (std::size_t i = n; i > 1; --i) {
        const auto j = rng.below(i, static_cast<std::uint32_t>(i));
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace increff
