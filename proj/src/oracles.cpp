#include "oanade/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "oanade/errors.hpp"
#include "oanade/losses.hpp"
#include "oanade/numerics.hpp"

namespace oanade::oracles {

namespace {

std::vector<std::size_t> members_of(std::uint64_t bits, std::size_t dimension) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < dimension; ++i) {
        if ((bits >> i) & 1U) out.push_back(i);
    }
    return out;
}

double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

std::string format_error(double e) {
    std::ostringstream os;
    os << "max relative error " << e;
    return os.str();
}

BitVector random_bits(std::size_t dimension, Rng& rng) {
    BitVector x(dimension);
    for (auto& b : x) b = static_cast<Bit>(rng() >> 63);
    return x;
}

GradientFunction estimator_objective(const NadeModel& model, const SampledContext& context) {
    return [model, context](const ParameterList& params, ParameterList* grads) {
        NadeModel probe = model;
        probe.params = Parameters::from_list(params);
        const EstimateResult r = estimate_at(probe, context, grads != nullptr);
        if (grads) *grads = r.gradients.to_list();
        return r.loss.value;
    };
}

}  // namespace

double expected_oa_estimate(const NadeModel& model, std::span<const Bit> x) {
    const std::size_t D = model.dimension;
    if (D > 16) throw CapacityError("expected_oa_estimate: D too large to enumerate");
    double expectation = 0.0;
    for (std::uint64_t bits = 0; bits + 1 < (std::uint64_t{1} << D); ++bits) {
        const auto prefix = members_of(bits, D);
        const double probability = 1.0 / (static_cast<double>(D) * static_cast<double>(binomial(D, prefix.size())));
        const auto r = oa_loss_at(model, make_oa_context(x, ObservedSet(D, prefix)), false);
        expectation += probability * r.loss.value;
    }
    return expectation;
}

double expected_oapp_estimate(const NadeModel& model, std::span<const Bit> x, const OrderingSet& orderings,
                              const QueryDistribution& dist) {
    const std::size_t D = model.dimension;
    double expectation = 0.0;
    for (const auto& [obs, p_obs] : query_support(dist, D)) {
        const std::size_t n_missing = D - obs.size();
        const double p_branch = p_obs / (static_cast<double>(orderings.k()) * static_cast<double>(n_missing));
        for (std::size_t k = 0; k < orderings.k(); ++k) {
            for (std::size_t d = 1; d <= n_missing; ++d) {
                const auto r = oapp_loss_at(model, make_oapp_context(x, obs, orderings, k, d), false);
                expectation += p_branch * r.loss.value;
            }
        }
    }
    return expectation;
}

double naive_fixed_order_nll(const NadeModel& model, std::span<const Bit> x, const Ordering& ordering) {
    const std::size_t D = model.dimension;
    double nll = 0.0;
    for (std::size_t pos = 0; pos < D; ++pos) {
        BitVector mask(D, 0);
        for (std::size_t q = 0; q < pos; ++q) mask[ordering[q]] = 1;
        const ForwardTrace t = forward(model, x, mask);
        const std::size_t v = ordering[pos];
        nll += bernoulli_nll(t.logits[v], x[v]);
    }
    return nll;
}

double naive_oa_loss(const NadeModel& model, std::span<const Bit> x) {
    const std::size_t D = model.dimension;
    std::vector<std::size_t> perm(D);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double sum = 0.0;
    std::size_t count = 0;
    do {
        sum += naive_fixed_order_nll(model, x, Ordering(perm));
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return sum / static_cast<double>(count);
}

std::uint64_t brute_force_conditionals_of_size(std::size_t dimension, std::size_t d) {
    if (dimension > 20) throw CapacityError("brute_force_conditionals_of_size: D too large");
    std::uint64_t count = 0;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << dimension); ++bits) {
        if (static_cast<std::size_t>(std::popcount(bits)) + 1 != d) continue;
        for (std::size_t t = 0; t < dimension; ++t) {
            if (!((bits >> t) & 1U)) ++count;
        }
    }
    return count;
}

NadeModel tiny_model(std::size_t dimension, std::size_t hidden, std::uint64_t seed) {
    NadeModel model = init_model(dimension, hidden, hidden, seed);
    Rng rng(derive_seed(seed, 99));
    for (Matrix* b : {&model.params.b1, &model.params.b2, &model.params.b3}) {
        for (std::size_t i = 0; i < b->size(); ++i) (*b)[i] = 0.2 + 0.6 * uniform_unit(rng) * (i % 2 ? 1.0 : -1.0);
    }
    return model;
}

std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed) {
    std::vector<OracleCheck> checks;
    Rng rng(seed);

    {
        const NadeModel model = tiny_model(4, 8, seed);
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            const BitVector x = random_bits(4, rng);
            worst = std::max(worst, relative_error(expected_oa_estimate(model, x), oa_loss_exact(model, x).value));
        }
        checks.push_back({"oa-unbiased (D=4)", worst <= 1e-10, format_error(worst)});
    }

    {
        const NadeModel model = tiny_model(4, 8, seed + 1);
        const QueryDistribution dists[] = {QueryDistribution::point_mass_empty(), QueryDistribution::fixed_size(1),
                                           QueryDistribution::uniform()};
        for (std::size_t k : {1, 2}) {
            const OrderingSet orderings = sample_ordering_set(4, k, seed + k);
            for (const auto& dist : dists) {
                double worst = 0.0;
                for (int i = 0; i < 5; ++i) {
                    const BitVector x = random_bits(4, rng);
                    worst = std::max(worst, relative_error(expected_oapp_estimate(model, x, orderings, dist),
                                                           oapp_loss_exact(model, x, orderings, dist).value));
                }
                checks.push_back({"oapp-unbiased (D=4, K=" + std::to_string(k) + ", " + dist.to_string() + ")",
                                  worst <= 1e-10, format_error(worst)});
            }
        }
    }

    {
        const NadeModel model = tiny_model(3, 8, seed + 2);
        const OrderingSet all = all_orderings(3);
        const OrderingSet one = sample_ordering_set(3, 1, seed);
        double worst_all = 0.0, worst_one = 0.0, worst_naive = 0.0;
        for (std::uint64_t bits = 0; bits < 8; ++bits) {
            const BitVector x{static_cast<Bit>(bits & 1U), static_cast<Bit>((bits >> 1) & 1U), static_cast<Bit>((bits >> 2) & 1U)};
            const double oa = oa_loss_exact(model, x).value;
            worst_naive = std::max(worst_naive, relative_error(oa, naive_oa_loss(model, x)));
            worst_all = std::max(worst_all, relative_error(oapp_loss_exact(model, x, all, QueryDistribution::point_mass_empty()).value, oa));
            worst_one = std::max(worst_one, relative_error(oapp_loss_exact(model, x, one, QueryDistribution::point_mass_empty()).value,
                                                           naive_fixed_order_nll(model, x, one[0])));
        }
        checks.push_back({"oa-exact-vs-naive (D=3)", worst_naive <= 1e-10, format_error(worst_naive)});
        checks.push_back({"reduction K=D! equals OA (D=3)", worst_all <= 1e-10, format_error(worst_all)});
        checks.push_back({"reduction K=1 equals fixed-order NLL (D=3)", worst_one <= 1e-10, format_error(worst_one)});
    }

    {
        bool ok = true;
        std::string detail = "D<=10 identities, brute force D<=5";
        for (std::size_t D = 1; D <= 10; ++D) {
            std::uint64_t sum = 0;
            for (std::size_t d = 1; d <= D; ++d) {
                sum += count_conditionals_of_size(D, d);
                if (D <= 5 && count_conditionals_of_size(D, d) != brute_force_conditionals_of_size(D, d)) ok = false;
            }
            if (sum != D * (std::uint64_t{1} << (D - 1))) ok = false;
            const std::uint64_t oapp = count_trained_conditionals_oapp(D, 1);
            if (oapp != (std::uint64_t{1} << D) - 1) ok = false;
            if (D >= 2 && !(oapp < sum)) ok = false;
        }
        checks.push_back({"counting identities", ok, detail});
    }

    {
        const NadeModel model = tiny_model(5, 4, seed + 3);
        const BitVector x = random_bits(5, rng);
        const OrderingSet orderings = sample_ordering_set(5, 2, seed);
        const SampledContext oa = sample_oa_context(x, rng);
        const SampledContext oapp = sample_oapp_context(x, orderings, QueryDistribution::uniform(), rng);
        const auto r1 = check_gradient(estimator_objective(model, oa), model.params.to_list(), 1e-5);
        const auto r2 = check_gradient(estimator_objective(model, oapp), model.params.to_list(), 1e-5);
        checks.push_back({"oa-gradient (D=5, H=4)", r1.max_relative_error <= 1e-5, format_error(r1.max_relative_error)});
        checks.push_back({"oapp-gradient (D=5, H=4)", r2.max_relative_error <= 1e-5, format_error(r2.max_relative_error)});
    }
    return checks;
}

}  // namespace oanade::oracles
