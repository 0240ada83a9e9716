#include "oanade/losses.hpp"

#include <cmath>

#include "oanade/errors.hpp"

namespace oanade {

namespace {

constexpr std::size_t kMaxExactDimension = 6;

void require_binary(std::span<const Bit> x, std::size_t dimension, const char* where) {
    if (x.size() != dimension) {
        throw InvalidArgument(std::string(where) + ": expected x of length " + std::to_string(dimension));
    }
    for (Bit b : x) {
        if (b > 1) throw InvalidArgument(std::string(where) + ": x must be binary");
    }
}

EstimateResult evaluate_targets(const NadeModel& model, const SampledContext& context, bool with_gradients) {
    require_binary(context.x, model.dimension, "estimator");
    if (context.prefix.dimension() != model.dimension) throw InvalidArgument("estimator: mask dimension mismatch");
    const ForwardTrace trace = forward(model, context.x, context.prefix);

    EstimateResult out;
    out.context = context;
    out.loss.computations = 1;
    std::vector<double> cotangent(model.dimension, 0.0);
    double sum = 0.0;
    for (std::size_t t : context.targets) {
        const double logit = trace.logits[t];
        sum += bernoulli_nll(logit, context.x[t]);
        cotangent[t] = context.scale * bernoulli_nll_grad(logit, context.x[t]);
    }
    out.loss.value = context.scale * sum;
    if (with_gradients) {
        out.gradients = model.params.zeros_like();
        accumulate_backward(model, trace, cotangent, out.gradients);
    }
    return out;
}

}  // namespace

std::string to_string(Procedure procedure) { return procedure == Procedure::OA ? "oa" : "oapp"; }

Procedure parse_procedure(const std::string& text) {
    if (text == "oa") return Procedure::OA;
    if (text == "oapp" || text == "oa++") return Procedure::OAPP;
    throw InvalidArgument("unknown procedure '" + text + "' (expected oa or oapp)");
}

LossValue chain_rule_nll(const NadeModel& model, std::span<const Bit> x, const ObservedSet& obs, const Ordering& ordering) {
    require_binary(x, model.dimension, "chain_rule_nll");
    if (ordering.dimension() != model.dimension) throw InvalidArgument("chain_rule_nll: ordering dimension mismatch");
    BitVector mask = obs.indicator();
    LossValue out;
    for (std::size_t v : ordering.missing_in_order(obs)) {
        const ForwardTrace trace = forward(model, x, mask);
        out.value += bernoulli_nll(trace.logits[v], x[v]);
        ++out.computations;
        mask[v] = 1;
    }
    return out;
}

LossValue oa_loss_exact(const NadeModel& model, std::span<const Bit> x) {
    const std::size_t D = model.dimension;
    if (D > kMaxExactDimension) throw CapacityError("oa_loss_exact: D=" + std::to_string(D) + " exceeds 6");
    require_binary(x, D, "oa_loss_exact");

    // Under a uniform ordering, (conditioning set S, next variable t) occurs
    // at step |S|+1 with probability 1 / (C(D,|S|) * (D-|S|)).
    LossValue out;
    BitVector mask(D, 0);
    for (std::size_t bits = 0; bits + 1 < (std::size_t{1} << D); ++bits) {
        std::size_t size = 0;
        for (std::size_t i = 0; i < D; ++i) {
            mask[i] = (bits >> i) & 1U;
            size += mask[i];
        }
        const ForwardTrace trace = forward(model, x, mask);
        ++out.computations;
        const double weight = 1.0 / (static_cast<double>(binomial(D, size)) * static_cast<double>(D - size));
        double sum = 0.0;
        for (std::size_t t = 0; t < D; ++t) {
            if (!mask[t]) sum += bernoulli_nll(trace.logits[t], x[t]);
        }
        out.value += weight * sum;
    }
    return out;
}

SampledContext make_oa_context(std::span<const Bit> x, const ObservedSet& prefix) {
    const std::size_t D = x.size();
    if (prefix.dimension() != D) throw InvalidArgument("make_oa_context: prefix dimension mismatch");
    if (prefix.is_full()) throw InvalidArgument("make_oa_context: prefix leaves no target");
    SampledContext c;
    c.procedure = Procedure::OA;
    c.x.assign(x.begin(), x.end());
    c.obs = ObservedSet(D);
    c.prefix = prefix;
    c.d = prefix.size() + 1;
    c.targets = prefix.complement();
    c.scale = static_cast<double>(D) / static_cast<double>(D - c.d + 1);
    return c;
}

SampledContext sample_oa_context(std::span<const Bit> x, Rng& rng) {
    const std::size_t D = x.size();
    if (D == 0) throw InvalidArgument("sample_oa_context: empty x");
    const std::size_t d = 1 + uniform_index(rng, D);
    return make_oa_context(x, ObservedSet(D, random_subset(rng, D, d - 1)));
}

EstimateResult oa_loss_at(const NadeModel& model, const SampledContext& context, bool with_gradients) {
    if (context.procedure != Procedure::OA) throw InvalidArgument("oa_loss_at: not an OA context");
    return evaluate_targets(model, context, with_gradients);
}

EstimateResult oa_loss_estimate(const NadeModel& model, std::span<const Bit> x, Rng& rng) {
    return oa_loss_at(model, sample_oa_context(x, rng));
}

LossValue oapp_loss_exact(const NadeModel& model, std::span<const Bit> x, const OrderingSet& orderings,
                          const QueryDistribution& dist) {
    const std::size_t D = model.dimension;
    if (D > kMaxExactDimension) throw CapacityError("oapp_loss_exact: D=" + std::to_string(D) + " exceeds 6");
    if (orderings.k() == 0 || orderings.dimension() != D) throw InvalidArgument("oapp_loss_exact: ordering set mismatch");
    require_binary(x, D, "oapp_loss_exact");

    const double per_ordering = 1.0 / static_cast<double>(orderings.k());
    LossValue out;
    for (const auto& [obs, probability] : query_support(dist, D)) {
        for (const Ordering& o : orderings.orderings) {
            const LossValue chain = chain_rule_nll(model, x, obs, o);
            out.value += probability * per_ordering * chain.value;
            out.computations += chain.computations;
        }
    }
    return out;
}

SampledContext make_oapp_context(std::span<const Bit> x, const ObservedSet& obs, const OrderingSet& orderings,
                                 std::size_t ordering_index, std::size_t d) {
    const std::size_t D = x.size();
    if (obs.dimension() != D) throw InvalidArgument("make_oapp_context: obs dimension mismatch");
    if (ordering_index >= orderings.k()) throw InvalidArgument("make_oapp_context: ordering index out of range");
    const std::vector<std::size_t> missing = orderings[ordering_index].missing_in_order(obs);
    if (d < 1 || d > missing.size()) throw InvalidArgument("make_oapp_context: d outside 1..D-|obs|");

    SampledContext c;
    c.procedure = Procedure::OAPP;
    c.x.assign(x.begin(), x.end());
    c.obs = obs;
    std::vector<std::size_t> prefix = obs.members();
    prefix.insert(prefix.end(), missing.begin(), missing.begin() + static_cast<std::ptrdiff_t>(d - 1));
    c.prefix = ObservedSet(D, std::move(prefix));
    c.d = d;
    c.ordering_index = ordering_index;
    c.targets = {missing[d - 1]};
    c.scale = static_cast<double>(missing.size());
    return c;
}

SampledContext sample_oapp_context(std::span<const Bit> x, const OrderingSet& orderings, const QueryDistribution& dist,
                                   Rng& rng) {
    const std::size_t D = x.size();
    if (orderings.k() == 0 || orderings.dimension() != D) throw InvalidArgument("sample_oapp_context: ordering set mismatch");
    const ObservedSet obs = sample_query(dist, D, rng);
    const std::size_t k = uniform_index(rng, orderings.k());
    const std::size_t d = 1 + uniform_index(rng, D - obs.size());
    return make_oapp_context(x, obs, orderings, k, d);
}

EstimateResult oapp_loss_at(const NadeModel& model, const SampledContext& context, bool with_gradients) {
    if (context.procedure != Procedure::OAPP) throw InvalidArgument("oapp_loss_at: not an OA++ context");
    return evaluate_targets(model, context, with_gradients);
}

EstimateResult oapp_loss_estimate(const NadeModel& model, std::span<const Bit> x, const OrderingSet& orderings,
                                  const QueryDistribution& dist, Rng& rng) {
    return oapp_loss_at(model, sample_oapp_context(x, orderings, dist, rng));
}

EstimateResult estimate_at(const NadeModel& model, const SampledContext& context, bool with_gradients) {
    return context.procedure == Procedure::OA ? oa_loss_at(model, context, with_gradients)
                                              : oapp_loss_at(model, context, with_gradients);
}

SampledContext sample_context(std::span<const Bit> x, const SamplingConfig& config, Rng& rng) {
    if (config.procedure == Procedure::OA) return sample_oa_context(x, rng);
    if (config.orderings == nullptr) throw InvalidArgument("sample_context: OA++ requires an ordering set");
    return sample_oapp_context(x, *config.orderings, config.dist, rng);
}

BatchResult minibatch_step(const NadeModel& model, std::span<const std::span<const Bit>> batch,
                           const SamplingConfig& config, Rng& rng) {
    if (batch.empty()) throw InvalidArgument("minibatch_step: empty batch");
    std::vector<SampledContext> contexts;
    contexts.reserve(batch.size());
    for (const auto& x : batch) contexts.push_back(sample_context(x, config, rng));
    return minibatch_at(model, contexts);
}

BatchResult minibatch_at(const NadeModel& model, std::span<const SampledContext> contexts) {
    if (contexts.empty()) throw InvalidArgument("minibatch_at: empty batch");
    BatchResult out;
    out.gradients = model.params.zeros_like();
    double sum = 0.0;
    for (const SampledContext& c : contexts) {
        require_binary(c.x, model.dimension, "minibatch");
        const ForwardTrace trace = forward(model, c.x, c.prefix);
        std::vector<double> cotangent(model.dimension, 0.0);
        double value = 0.0;
        for (std::size_t t : c.targets) {
            const double logit = trace.logits[t];
            value += bernoulli_nll(logit, c.x[t]);
            cotangent[t] = c.scale * bernoulli_nll_grad(logit, c.x[t]);
        }
        sum += c.scale * value;
        accumulate_backward(model, trace, cotangent, out.gradients);
    }
    const double inv = 1.0 / static_cast<double>(contexts.size());
    out.loss.value = sum * inv;
    out.loss.computations = contexts.size();
    out.gradients.scale(inv);
    out.contexts.assign(contexts.begin(), contexts.end());
    return out;
}

}  // namespace oanade
