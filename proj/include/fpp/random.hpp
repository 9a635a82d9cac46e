#pragma once

#include <cstdint>
#include <span>

namespace fpp {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v)); }

/// Counter-based key for a lattice edge (lower endpoint, axis) under a seed.
inline std::uint64_t edge_key(std::uint64_t seed, std::span<const int> lower_endpoint, int axis) {
    std::uint64_t h = mix64(seed);
    for (int c : lower_endpoint) h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
    return hash_combine(h, static_cast<std::uint64_t>(axis) + 0x51ed27ULL);
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
constexpr double uniform_open01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

/// Seed for replica `index` of an experiment with master seed `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return hash_combine(mix64(master ^ 0x7265706c696361ULL), index);
}

}  // namespace fpp
