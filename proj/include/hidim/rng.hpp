#pragma once

#include <cstdint>
#include <random>

namespace hidim {

/// splitmix64 step; used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for the b-th replicate of a stream. Stable under reordering or
/// parallel execution of replicates.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t replicate = 0) {
    return mix64(mix64(base ^ mix64(stream)) ^ mix64(replicate + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace hidim
