#include "oanade/random.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "oanade/errors.hpp"

namespace oanade {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) throw InvalidArgument("uniform_index: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(n);
    // Reject the tail that would bias the modulo.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    return static_cast<std::size_t>(draw % range);
}

double uniform_unit(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> random_subset(Rng& rng, std::size_t universe, std::size_t count) {
    if (count > universe) throw InvalidArgument("random_subset: count exceeds universe");
    std::vector<std::size_t> pool(universe);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + uniform_index(rng, universe - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = uniform_index(rng, i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

}  // namespace oanade
