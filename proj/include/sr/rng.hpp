#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sr {

// All randomness in the project flows through std::mt19937_64 seeded
// explicitly. The engine's output sequence is pinned by the standard, and the
// helpers below avoid std::*_distribution (whose mappings are
// implementation-defined), so runs are reproducible byte-for-byte across
// platforms for a given seed.
using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive stream seeds from (seed, tag, index...)
// without correlations between nearby inputs.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed ^ mix64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t idx) {
    return mix64(derive_seed(seed, tag) ^ mix64(idx + 0x5851f42d4c957f2dULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t i, std::uint64_t j) {
    return mix64(derive_seed(seed, tag, i) ^ mix64(j + 0x14057b7ef767814fULL));
}

// Uniform double in [0, 1) with 53 random bits.
inline double u01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Exp(1) variate; used for Dirichlet-style random points on a simplex.
inline double exp1(Rng& rng) {
    double u;
    do { u = u01(rng); } while (u <= 0.0);
    return -std::log(u);
}

} // namespace sr
