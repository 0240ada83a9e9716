#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oanade/combinatorics.hpp"
#include "oanade/model.hpp"

namespace oanade::oracles {

// Expectation of the OA estimator, enumerating every (d, prefix) outcome with
// its sampling probability 1 / (D * C(D, d-1)).
double expected_oa_estimate(const NadeModel& model, std::span<const Bit> x);

// Expectation of the OA++ estimator over every (obs, ordering, d) outcome.
double expected_oapp_estimate(const NadeModel& model, std::span<const Bit> x, const OrderingSet& orderings,
                              const QueryDistribution& dist);

// Mean over all D! orderings of the full chain-rule NLL, evaluated one
// ordering at a time with its own forward passes.
double naive_oa_loss(const NadeModel& model, std::span<const Bit> x);

// Chain-rule NLL of x along one ordering, starting from the empty mask.
double naive_fixed_order_nll(const NadeModel& model, std::span<const Bit> x, const Ordering& ordering);

// Number of (conditioning set, target) pairs with |set| = d - 1, by explicit
// enumeration of subsets. D <= 20.
std::uint64_t brute_force_conditionals_of_size(std::size_t dimension, std::size_t d);

// A randomly initialized model with biases jittered away from zero so no ReLU
// sits exactly at its kink.
NadeModel tiny_model(std::size_t dimension, std::size_t hidden, std::uint64_t seed);

struct OracleCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// The D <= 5 unbiasedness, reduction, counting and gradient suites.
std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed);

}  // namespace oanade::oracles
