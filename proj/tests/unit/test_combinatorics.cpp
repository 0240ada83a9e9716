#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "oanade/combinatorics.hpp"
#include "oanade/errors.hpp"
#include "oracle_util.hpp"

using namespace oanade;

namespace {

// Enumerates every (conditioning set, target outside it) pair with |set| = d-1.
std::uint64_t enumerate_pairs(std::size_t D, std::size_t d) {
    std::uint64_t count = 0;
    for (std::uint64_t bits = 0; bits < (1ULL << D); ++bits) {
        std::size_t size = 0;
        for (std::size_t i = 0; i < D; ++i) size += (bits >> i) & 1U;
        if (size + 1 == d) count += D - size;
    }
    return count;
}

}  // namespace

TEST_CASE("ObservedSet basics") {
    const ObservedSet s(5, {3, 0});
    CHECK(s.members() == std::vector<std::size_t>{0, 3});
    CHECK(s.contains(3));
    CHECK(!s.contains(1));
    CHECK(s.complement() == std::vector<std::size_t>{1, 2, 4});
    CHECK(s.indicator() == BitVector{1, 0, 0, 1, 0});
    CHECK(ObservedSet::from_indicator(s.indicator()) == s);
    CHECK(s.with(2).members() == std::vector<std::size_t>{0, 2, 3});
    CHECK_THROWS_AS(ObservedSet(3, {0, 0}), InvalidArgument);
    CHECK_THROWS_AS(ObservedSet(3, {3}), InvalidArgument);
}

TEST_CASE("Ordering validates and inverts") {
    CHECK_THROWS_AS(Ordering({0, 0, 1}), InvalidArgument);
    CHECK_THROWS_AS(Ordering({0, 3, 1}), InvalidArgument);
    const Ordering o({2, 0, 1});
    CHECK(o.missing_in_order(ObservedSet(3, {0})) == std::vector<std::size_t>{2, 1});
}

TEST_CASE("sample_ordering_set: determinism, exhaustion, pigeonhole") {
    const OrderingSet a = sample_ordering_set(4, 1, 17);
    const OrderingSet b = sample_ordering_set(4, 1, 17);
    CHECK(a.k() == 1);
    CHECK(a.orderings == b.orderings);

    const OrderingSet all = sample_ordering_set(3, 6, 5);
    std::set<Ordering> distinct(all.orderings.begin(), all.orderings.end());
    CHECK(distinct.size() == 6);
    const OrderingSet lex = all_orderings(3);
    CHECK(distinct == std::set<Ordering>(lex.orderings.begin(), lex.orderings.end()));

    CHECK_THROWS_AS(sample_ordering_set(3, 7, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_ordering_set(3, 0, 1), InvalidArgument);
}

TEST_CASE("property: sampled orderings are distinct permutations with working inverses") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t D = 2 + seed % 7;
        const std::size_t K = 1 + seed % 5;
        const OrderingSet set = sample_ordering_set(D, std::min<std::size_t>(K, factorial(D)), seed);
        std::set<Ordering> distinct(set.orderings.begin(), set.orderings.end());
        CHECK(distinct.size() == set.k());
        for (const Ordering& o : set.orderings) {
            CHECK(o.then(o.inverse()) == Ordering::identity(D));
            CHECK(o.inverse().then(o) == Ordering::identity(D));
            CHECK(o.then(o).then(o.inverse()).then(o.inverse()) == Ordering::identity(D));
        }
    }
}

TEST_CASE("ordering set file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "oanade_orderings_test.txt";
    const OrderingSet set = sample_ordering_set(7, 3, 99);
    save_ordering_set(set, path);
    const OrderingSet back = load_ordering_set(path);
    CHECK(back.orderings == set.orderings);
    CHECK(back.seed == 99);
    std::filesystem::remove(path);
}

TEST_CASE("sample_query kinds") {
    Rng rng(1);
    for (int i = 0; i < 20; ++i) CHECK(sample_query(QueryDistribution::point_mass_empty(), 7, rng).empty());
    for (int i = 0; i < 20; ++i) CHECK(sample_query(QueryDistribution::fixed_size(56), 112, rng).size() == 56);
    for (int i = 0; i < 20; ++i) CHECK(sample_query(QueryDistribution::fixed_size_half(), 112, rng).size() == 56);
    const ObservedSet fixed(5, {1, 4});
    CHECK(sample_query(QueryDistribution::fixed_set(fixed), 5, rng) == fixed);
    CHECK_THROWS_AS(sample_query(QueryDistribution::fixed_size(7), 7, rng), InvalidArgument);
    CHECK_THROWS_AS(sample_query(QueryDistribution::fixed_set(ObservedSet::full(3)), 3, rng), InvalidArgument);
}

TEST_CASE("property: sample_query never returns a full set") {
    Rng rng(2);
    const QueryDistribution dists[] = {QueryDistribution::uniform(), QueryDistribution::uniform_subset(),
                                       QueryDistribution::fixed_size_half()};
    for (const auto& dist : dists)
        for (std::size_t D = 1; D <= 6; ++D)
            for (int i = 0; i < 300; ++i) REQUIRE(!sample_query(dist, D, rng).is_full());
}

TEST_CASE("uniform-size sampler at D=3: sizes equiprobable, subsets equiprobable within size") {
    // Exact distribution is 1/3 per size and 1/(3*C(3,s)) per subset; test
    // the empirical frequencies of every outcome at 4 sigma.
    Rng rng(77);
    const int n = 120000;
    std::map<std::vector<std::size_t>, int> counts;
    for (int i = 0; i < n; ++i) ++counts[sample_query(QueryDistribution::uniform(), 3, rng).members()];
    CHECK(counts.size() == 7);
    std::map<std::size_t, int> by_size;
    for (const auto& [members, c] : counts) {
        by_size[members.size()] += c;
        const double p = 1.0 / (3.0 * testing::ref_binomial(3, members.size()));
        const double sd = std::sqrt(n * p * (1 - p));
        CHECK(std::abs(c - n * p) < 4 * sd);
    }
    for (const auto& [s, c] : by_size) {
        const double sd = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
        CHECK(std::abs(c - n / 3.0) < 4 * sd);
    }
}

TEST_CASE("query_support agrees with the reference enumeration") {
    const QueryDistribution dists[] = {QueryDistribution::point_mass_empty(), QueryDistribution::fixed_size(1),
                                       QueryDistribution::fixed_size(2), QueryDistribution::uniform(),
                                       QueryDistribution::uniform_subset(),
                                       QueryDistribution::fixed_set(ObservedSet(4, {1, 2}))};
    for (const auto& dist : dists) {
        auto a = query_support(dist, 4);
        auto b = testing::ref_support(dist, 4);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        REQUIRE(a.size() == b.size());
        double total = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].first == b[i].first);
            CHECK(a[i].second == doctest::Approx(b[i].second).epsilon(1e-15));
            total += a[i].second;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(query_support(QueryDistribution::fixed_size(5), 10), CapacityError);  // C(10,5) = 252
    CHECK_THROWS_AS(query_support(QueryDistribution::uniform(), 7), CapacityError);
}

TEST_CASE("query distribution text form") {
    for (const std::string text : {"uniform", "uniform-subset", "empty", "fixed-size:3", "fixed-size:half", "fixed-set:0,2/5"}) {
        CHECK(QueryDistribution::parse(text).to_string() == text);
    }
    CHECK_THROWS_AS(QueryDistribution::parse("fixed-size:x"), InvalidArgument);
    CHECK_THROWS_AS(QueryDistribution::parse("normal"), InvalidArgument);
}

TEST_CASE("conditional counts") {
    CHECK(count_conditionals_of_size(3, 1) == 3);
    CHECK(count_conditionals_of_size(3, 2) == 6);
    CHECK(count_conditionals_of_size(3, 3) == 3);
    CHECK_THROWS_AS(count_conditionals_of_size(3, 0), InvalidArgument);
    CHECK_THROWS_AS(count_conditionals_of_size(3, 4), InvalidArgument);

    CHECK(count_trained_conditionals_oapp(3, 1) == 7);
    CHECK(count_trained_conditionals_oapp(3, 1) < 12);
    CHECK(count_trained_conditionals_oapp(3, 2) == 14);
    CHECK_THROWS_AS(count_trained_conditionals_oapp(64, 1), OverflowError);
    CHECK_THROWS_AS(count_trained_conditionals_oapp(40, std::size_t{1} << 40), OverflowError);
    CHECK_THROWS_AS(binomial(200, 100), OverflowError);
}

TEST_CASE("counts match brute-force enumeration and the closed forms") {
    for (std::size_t D = 1; D <= 10; ++D) {
        std::uint64_t sum = 0;
        for (std::size_t d = 1; d <= D; ++d) {
            sum += count_conditionals_of_size(D, d);
            if (D <= 5) CHECK(count_conditionals_of_size(D, d) == enumerate_pairs(D, d));
        }
        CHECK(sum == D * (1ULL << (D - 1)));
        CHECK(count_trained_conditionals_oapp(D, 1) == (1ULL << D) - 1);
        if (D >= 2) CHECK(count_trained_conditionals_oapp(D, 1) < sum);
    }
}

TEST_CASE("audit_conditional_usage") {
    CHECK(audit_conditional_usage({}, 4).empty());
    std::vector<TrainingEvent> events{{ObservedSet(4), {0, 1, 2, 3}}, {ObservedSet(4, {1}), {0}}, {ObservedSet(4, {2}), {3}}};
    const auto h = audit_conditional_usage(events, 4);
    CHECK(h.size() == 2);
    CHECK(h.at(1) == 1);
    CHECK(h.at(2) == 2);
    CHECK_THROWS_AS(audit_conditional_usage(events, 5), InvalidArgument);
}
