#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace oanade {

// The engine is fully specified by the standard, so draws are reproducible
// across platforms. Distributions are implemented here rather than taken
// from <random>, whose distribution algorithms are implementation-defined.
using Rng = std::mt19937_64;

// Mixes a base seed with a stream id (splitmix64 finalizer) so independent
// consumers of one user seed never share a generator sequence.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Uniform integer on [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

// Uniform double on [0, 1) with 53 random bits.
double uniform_unit(Rng& rng) noexcept;

// Uniform size-`count` subset of {0..universe-1}, returned sorted.
std::vector<std::size_t> random_subset(Rng& rng, std::size_t universe, std::size_t count);

// Uniform random permutation of {0..n-1} (Fisher-Yates).
std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n);

}  // namespace oanade
