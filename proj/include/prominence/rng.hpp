#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

// Deterministic randomness helpers. All distributions are hand-rolled on top
// of std::mt19937_64 so that streams are reproducible across standard-library
// implementations (the std:: distributions make no such guarantee).

namespace prominence {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stable per-stage seed derivation: one global seed fans out to independent
// streams keyed by a stage name ("vocabulary", "wordfish", ...).
inline std::uint64_t fan_seed(std::uint64_t seed, std::string_view stage) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : stage) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return splitmix64(seed ^ h);
}

using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& g, std::size_t n) {
    std::size_t v = static_cast<std::size_t>(uniform01(g) * static_cast<double>(n));
    return v < n ? v : n - 1;
}

// Standard normal via Box-Muller (one draw per call, no cached state).
inline double normal01(Rng& g) {
    double u1 = 1.0 - uniform01(g);  // (0, 1]
    double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Poisson draw. Knuth's product method for small means; larger means are
// split recursively (Poisson(a) + Poisson(b) ~ Poisson(a + b)).
inline long poisson(Rng& g, double lambda) {
    if (!(lambda > 0.0)) return 0;
    if (lambda > 30.0) {
        double half = lambda * 0.5;
        return poisson(g, half) + poisson(g, lambda - half);
    }
    const double limit = std::exp(-lambda);
    double p = 1.0;
    long k = 0;
    do {
        ++k;
        p *= uniform01(g);
    } while (p > limit);
    return k - 1;
}

}  // namespace prominence
