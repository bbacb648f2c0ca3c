#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace flowsel {

// SplitMix64 (Steele, Lea, Flood 2014). Fully specified 64-bit generator, so
// streams are identical on every platform. All randomness in this project
// funnels through one master seed; subsystems derive independent streams with
// derive_seed(master, tag, index) below.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0,1) with 53 random mantissa bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Fixed-point multiply keeps the reduction
    // portable; the residual bias is below 2^-64 for any n that fits memory.
    uint64_t uniform_below(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Standard normal via Box-Muller. One value per call; the sine partner is
    // discarded so the draw count per sample stays fixed.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Poisson by Knuth's product-of-uniforms method. Adequate for the means
    // used here (a few hundred at most).
    uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        double prod = 1.0;
        uint64_t k = 0;
        do {
            prod *= uniform01();
            ++k;
        } while (prod > limit);
        return k - 1;
    }

private:
    uint64_t state_;
};

namespace detail {
constexpr uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}
}  // namespace detail

// Derives the seed of an independent child stream. The tag names the
// subsystem ("tree", "cv-fold", ...) and index separates siblings. Two mixing
// rounds of SplitMix64 decorrelate nearby (seed, index) pairs.
inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index = 0) {
    SplitMix64 mixer(master ^ detail::fnv1a64(tag) ^
                     (index * 0x9e3779b97f4a7c15ULL));
    mixer.next();
    return mixer.next();
}

}  // namespace flowsel
