#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oanade/random.hpp"

namespace oanade {

using Bit = std::uint8_t;
using BitVector = std::vector<Bit>;

// A subset of the variable indices {0..D-1}, stored sorted. Used both for the
// observed variables of a completion query and for the conditioning mask of a
// single network evaluation.
class ObservedSet {
public:
    ObservedSet() = default;
    explicit ObservedSet(std::size_t dimension);
    ObservedSet(std::size_t dimension, std::vector<std::size_t> members);

    static ObservedSet full(std::size_t dimension);
    static ObservedSet from_indicator(std::span<const Bit> indicator);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    bool is_full() const noexcept { return members_.size() == dimension_; }
    const std::vector<std::size_t>& members() const noexcept { return members_; }

    bool contains(std::size_t index) const noexcept;
    BitVector indicator() const;
    // Indices not in the set, ascending.
    std::vector<std::size_t> complement() const;
    ObservedSet with(std::size_t index) const;

    friend bool operator==(const ObservedSet&, const ObservedSet&) = default;
    friend auto operator<=>(const ObservedSet&, const ObservedSet&) = default;

private:
    std::size_t dimension_ = 0;
    std::vector<std::size_t> members_;
};

// A permutation of {0..D-1}; perm()[position] is the variable visited at that position.
class Ordering {
public:
    Ordering() = default;
    explicit Ordering(std::vector<std::size_t> perm);

    static Ordering identity(std::size_t dimension);

    std::size_t dimension() const noexcept { return perm_.size(); }
    const std::vector<std::size_t>& perm() const noexcept { return perm_; }
    std::size_t operator[](std::size_t position) const noexcept { return perm_[position]; }

    Ordering inverse() const;
    // (a.then(b))[i] = b[a[i]]
    Ordering then(const Ordering& next) const;

    // Variables outside `obs`, listed in the order this permutation visits them.
    std::vector<std::size_t> missing_in_order(const ObservedSet& obs) const;

    friend bool operator==(const Ordering&, const Ordering&) = default;
    friend auto operator<=>(const Ordering&, const Ordering&) = default;

private:
    std::vector<std::size_t> perm_;
};

// The fixed set of K orderings used by OA++ training and ensemble completion.
struct OrderingSet {
    std::vector<Ordering> orderings;
    std::uint64_t seed = 0;

    std::size_t k() const noexcept { return orderings.size(); }
    std::size_t dimension() const noexcept { return orderings.empty() ? 0 : orderings.front().dimension(); }
    const Ordering& operator[](std::size_t i) const { return orderings.at(i); }
};

// Distribution of completion queries (which variables are observed).
struct QueryDistribution {
    enum class Kind {
        UniformSizeUniformSubset,  // size uniform on {0..D-1}, then a uniform subset of that size
        UniformSubset,             // every non-full subset equally likely
        FixedSize,                 // uniform subset of a fixed size
        FixedSizeHalf,             // FixedSize(D/2), resolved against D at use
        FixedSet,
        PointMassEmpty,
    };

    Kind kind = Kind::UniformSizeUniformSubset;
    std::size_t size = 0;      // FixedSize
    ObservedSet observed;      // FixedSet

    static QueryDistribution uniform() { return {}; }
    static QueryDistribution uniform_subset() { return {Kind::UniformSubset, 0, {}}; }
    static QueryDistribution fixed_size(std::size_t s) { return {Kind::FixedSize, s, {}}; }
    static QueryDistribution fixed_size_half() { return {Kind::FixedSizeHalf, 0, {}}; }
    static QueryDistribution fixed_set(ObservedSet set) { return {Kind::FixedSet, 0, std::move(set)}; }
    static QueryDistribution point_mass_empty() { return {Kind::PointMassEmpty, 0, {}}; }

    // Throws InvalidArgument if the distribution could produce a query with
    // no missing variables (or is otherwise malformed) for this D.
    void validate(std::size_t dimension) const;

    // Textual form used by the CLI and file headers:
    //   uniform | uniform-subset | empty | fixed-size:<s> | fixed-size:half | fixed-set:<i,j,...>
    std::string to_string() const;
    static QueryDistribution parse(const std::string& text);

    friend bool operator==(const QueryDistribution&, const QueryDistribution&) = default;
};

ObservedSet sample_query(const QueryDistribution& dist, std::size_t dimension, Rng& rng);

// Exact support of `dist` with probabilities. Throws CapacityError when the
// support has more than `max_support` elements.
std::vector<std::pair<ObservedSet, double>> query_support(const QueryDistribution& dist, std::size_t dimension,
                                                          std::size_t max_support = 64);

// K distinct uniformly random orderings (Fisher-Yates, duplicates rejected).
OrderingSet sample_ordering_set(std::size_t dimension, std::size_t k, std::uint64_t seed);
// All D! orderings in lexicographic order; D <= 8.
OrderingSet all_orderings(std::size_t dimension);

void save_ordering_set(const OrderingSet& set, const std::filesystem::path& path);
OrderingSet load_ordering_set(const std::filesystem::path& path);

// Exact binomial coefficient; throws OverflowError past 64 bits.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);
// D! for D <= 20; throws OverflowError beyond.
std::uint64_t factorial(std::uint64_t n);

// Number of distinct one-dimensional conditionals with d-1 conditioning
// variables: C(D, d-1) * (D - d + 1).
std::uint64_t count_conditionals_of_size(std::size_t dimension, std::size_t d);
// Upper bound on conditionals reachable from K fixed orderings: K * (2^D - 1).
std::uint64_t count_trained_conditionals_oapp(std::size_t dimension, std::size_t k);

// One trained network evaluation: the conditioning mask and the variables
// whose conditionals received gradient from it.
struct TrainingEvent {
    ObservedSet mask;
    std::vector<std::size_t> targets;

    // Size of the trained conditionals: |mask| + 1.
    std::size_t conditional_size() const noexcept { return mask.size() + 1; }
};

// Histogram of trained-conditional sizes d -> event count. Sizes with no
// events are absent.
std::map<std::size_t, std::size_t> audit_conditional_usage(std::span<const TrainingEvent> events, std::size_t dimension);

}  // namespace oanade
