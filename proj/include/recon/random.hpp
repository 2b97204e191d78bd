#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace recon {

struct Seed {
    std::uint64_t value = 0;
};

// SplitMix64 (Steele, Lea, Flood 2014). 64-bit state, increment
// 0x9E3779B97F4A7C15, output mix constants 0xBF58476D1CE4E5B9 and
// 0x94D049BB133111EB with shifts 30/27/31. Every random draw in the library
// goes through this generator so streams are reproducible bit for bit.
class SplitMix64 {
public:
    explicit SplitMix64(Seed seed) : state_(seed.value) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Uses Lemire's multiply-shift; bias is
    /// below 2^-32 for the sizes used here.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// Standard normal via Box-Muller. Draws come in pairs; the sine branch
    /// is cached and returned on the next call.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace recon
