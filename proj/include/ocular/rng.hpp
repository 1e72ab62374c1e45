#pragma once

#include <cstdint>
#include <random>

namespace ocular {

// Seed mixing (splitmix64 finalizer). Used to derive independent stream
// seeds from (base seed, purpose/epoch/index) so results do not depend on
// scheduling or call order.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ b); }
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a, b) ^ c);
}

// All randomness flows through mt19937_64, whose output sequence is fully
// specified by the standard, so manifests and parameter draws reproduce
// across platforms. Uniform doubles are derived from the raw 64-bit output
// directly rather than through distribution objects (those are
// implementation-defined).
using Rng = std::mt19937_64;

// Uniform in [0, 1).
inline double uniform01(Rng& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform in [lo, hi].
inline double uniform(Rng& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& g, std::uint64_t n) {
    // modulo bias is < 2^-40 for any n we ever pass; acceptable for shuffling
    return g() % n;
}

}  // namespace ocular
