#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oanade/combinatorics.hpp"
#include "oanade/model.hpp"

namespace oanade {

enum class Procedure { OA, OAPP };

std::string to_string(Procedure procedure);
Procedure parse_procedure(const std::string& text);

struct LossValue {
    double value = 0.0;             // nats
    std::size_t computations = 0;   // network inferences consumed
};

// The frozen random choices behind one estimator evaluation.
struct SampledContext {
    Procedure procedure = Procedure::OA;
    BitVector x;
    ObservedSet obs;     // completion query (OA++); empty for OA
    ObservedSet prefix;  // conditioning mask of the single forward pass
    std::size_t d = 1;   // 1-based position of the trained conditionals
    std::optional<std::size_t> ordering_index;  // OA++ only
    std::vector<std::size_t> targets;           // variables whose NLL enters the loss
    double scale = 1.0;  // D/(D-d+1) for OA, D-|obs| for OA++

    TrainingEvent event() const { return {prefix, targets}; }
};

struct EstimateResult {
    LossValue loss;
    Parameters gradients;
    SampledContext context;
};

// Sum of -log p(x_t | x_S) over the missing variables of `obs`, visited in
// `ordering` order with the mask growing after each step. One forward per
// missing variable.
LossValue chain_rule_nll(const NadeModel& model, std::span<const Bit> x, const ObservedSet& obs, const Ordering& ordering);

// Expected NLL over all D! orderings. Enumerates the 2^D conditioning sets
// once each. D <= 6.
LossValue oa_loss_exact(const NadeModel& model, std::span<const Bit> x);

// OA contexts: prefix is the conditioned set, every other variable is a target.
SampledContext make_oa_context(std::span<const Bit> x, const ObservedSet& prefix);
// d uniform on {1..D}, then a uniform (d-1)-subset.
SampledContext sample_oa_context(std::span<const Bit> x, Rng& rng);
EstimateResult oa_loss_at(const NadeModel& model, const SampledContext& context, bool with_gradients = true);
EstimateResult oa_loss_estimate(const NadeModel& model, std::span<const Bit> x, Rng& rng);

// Exact OA++ loss for one x: expectation over the query support, the K
// orderings (uniform), and the chain rule along each ordering's missing
// variables. D <= 6 and support <= 64.
LossValue oapp_loss_exact(const NadeModel& model, std::span<const Bit> x, const OrderingSet& orderings,
                          const QueryDistribution& dist);

SampledContext make_oapp_context(std::span<const Bit> x, const ObservedSet& obs, const OrderingSet& orderings,
                                 std::size_t ordering_index, std::size_t d);
// Draw order: obs ~ dist, then ordering index, then d on {1..D-|obs|}.
SampledContext sample_oapp_context(std::span<const Bit> x, const OrderingSet& orderings, const QueryDistribution& dist,
                                   Rng& rng);
EstimateResult oapp_loss_at(const NadeModel& model, const SampledContext& context, bool with_gradients = true);
EstimateResult oapp_loss_estimate(const NadeModel& model, std::span<const Bit> x, const OrderingSet& orderings,
                                  const QueryDistribution& dist, Rng& rng);

// Dispatches on context.procedure.
EstimateResult estimate_at(const NadeModel& model, const SampledContext& context, bool with_gradients = true);

struct SamplingConfig {
    Procedure procedure = Procedure::OA;
    const OrderingSet* orderings = nullptr;  // required for OA++
    QueryDistribution dist;                  // OA++ training queries
};

struct BatchResult {
    LossValue loss;  // mean value; computations = batch size
    Parameters gradients;  // mean gradient
    std::vector<SampledContext> contexts;
};

SampledContext sample_context(std::span<const Bit> x, const SamplingConfig& config, Rng& rng);

// Samples one context per example (in batch order) and averages.
BatchResult minibatch_step(const NadeModel& model, std::span<const std::span<const Bit>> batch,
                           const SamplingConfig& config, Rng& rng);
// Same reduction with the sampling already fixed.
BatchResult minibatch_at(const NadeModel& model, std::span<const SampledContext> contexts);

}  // namespace oanade
