#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace metasim {

// Deterministic random source. All distributions are derived from raw
// mt19937_64 output by hand: std::uniform_real_distribution and friends are
// implementation-defined and would break byte-identical replays across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Inverse-CDF exponential draw with the given rate.
    double exponential(double lambda) {
        return -std::log1p(-uniform01()) / lambda;
    }

    // Uniform integer in [0, n). n must be > 0; uses rejection to stay unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = eng_(); } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace metasim
