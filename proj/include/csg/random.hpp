#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace csg {

/// Explicit, seedable generator state. Never shared between concurrent runs.
using Rng = std::mt19937_64;

/// Generator seeded from a 64-bit seed passed through splitmix64, so that
/// consecutive seeds (base_seed + replication) give unrelated streams.
Rng make_rng(std::uint64_t seed);

/// Uniform double in [0, 1) with 53 random bits. Bit-identical across
/// standard libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform double in [lo, hi].
double uniform_in(Rng& rng, double lo, double hi);

/// Uniform index in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace csg
