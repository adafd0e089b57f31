#pragma once

#include <cstdint>

namespace featbench {

/// splitmix64: the fixed 64-bit mixing sequence behind every seeded choice
/// in this project (noise pixel selection, the BRIEF pattern, test
/// fixtures). Chosen because it is tiny, well known, and produces the same
/// stream on every platform.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n) by the multiply-shift reduction (no libm, no
    /// platform-dependent rounding).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Approximate standard normal as a sum of 12 uniforms minus 6.
    /// Adds and multiplies only, so the value is identical on any IEEE-754
    /// machine.
    double next_gaussian() {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += next_unit();
        return s - 6.0;
    }
};

}  // namespace featbench
