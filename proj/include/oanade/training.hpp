#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oanade/combinatorics.hpp"
#include "oanade/dataset.hpp"
#include "oanade/losses.hpp"
#include "oanade/model.hpp"

namespace oanade {

// ---------------------------------------------------------------- optimizers

enum class OptimizerKind { SGD, Adam };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& text);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    Parameters m;
    Parameters v;
    std::uint64_t step = 0;
};

// Bias-corrected Adam. The moment buffers are created on the first call.
void adam_step(Parameters& params, const Parameters& grads, AdamState& state, double learning_rate,
               const AdamConfig& config = {});
void sgd_step(Parameters& params, const Parameters& grads, double learning_rate);

// ------------------------------------------------------------- query sets

struct Query {
    std::size_t row = 0;  // index into the split the set was drawn from
    BitVector x;
    ObservedSet obs;
};

struct QuerySet {
    std::vector<Query> queries;
    std::uint64_t seed = 0;
    QueryDistribution distribution;
    std::size_t dimension = 0;

    std::size_t size() const noexcept { return queries.size(); }
    bool empty() const noexcept { return queries.empty(); }
};

// x drawn uniformly (with replacement) from `split`, obs from `dist`.
QuerySet generate_query_set(const BitMatrix& split, const QueryDistribution& dist, std::size_t n_queries,
                            std::uint64_t seed);

// Text form: a header comment with seed, distribution and D, then one line
// per query: the row index followed by the observed indices.
std::string format_query_set(const QuerySet& set);
void save_query_set(const QuerySet& set, const std::filesystem::path& path);
QuerySet load_query_set(const std::filesystem::path& path, const BitMatrix& split);

// ------------------------------------------------------------- evaluation

// -log((1/K) sum_k p_k(x_missing | x_obs)), each p_k a chain-rule product along
// ordering k. Costs K * (D - |obs|) inferences, reported in `computations`.
LossValue completion_nll_with_cost(const NadeModel& model, std::span<const Bit> x, const ObservedSet& obs,
                                   const OrderingSet& orderings);
double completion_nll(const NadeModel& model, std::span<const Bit> x, const ObservedSet& obs,
                      const OrderingSet& orderings);

// Mean completion NLL over the set, reduced in query order.
LossValue evaluate_with_cost(const NadeModel& model, const QuerySet& queries, const OrderingSet& orderings);
double evaluate(const NadeModel& model, const QuerySet& queries, const OrderingSet& orderings);

// Samples the missing variables one at a time along `ordering`. Entries of
// x_obs outside `obs` are ignored.
BitVector impute(const NadeModel& model, std::span<const Bit> x_obs, const ObservedSet& obs, const Ordering& ordering,
                 Rng& rng);

// ------------------------------------------------------------- training

struct MetricRow {
    double computations_over_d = 0.0;  // training inferences / D
    double train_loss = 0.0;           // mean estimator value since the previous row (nan on the first row)
    double valid_nll = 0.0;

    friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct MetricTrace {
    std::vector<MetricRow> rows;

    static constexpr const char* csv_header = "computations_over_D,train_loss,valid_nll";
    std::string to_csv() const;
    void save_csv(const std::filesystem::path& path) const;
    static MetricTrace load_csv(const std::filesystem::path& path);
};

struct TrainConfig {
    Procedure procedure = Procedure::OAPP;
    std::size_t k = 1;
    QueryDistribution query_dist;  // OA++ training queries and the validation set
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    AdamConfig adam;
    std::uint64_t budget = 200000;  // training inferences
    std::uint64_t eval_every = 10000;
    std::size_t valid_queries = 1000;
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 20;  // evaluations without improvement; 0 disables
    bool record_events = false;
    std::optional<OrderingSet> orderings;  // otherwise K orderings are sampled from the seed

    void validate() const;
};

struct BudgetLedger {
    std::uint64_t training_inferences = 0;
    std::uint64_t evaluation_inferences = 0;
};

struct TrainResult {
    NadeModel model;  // best validation snapshot
    MetricTrace trace;
    OrderingSet orderings;
    QuerySet valid_queries;
    BudgetLedger ledger;
    std::vector<TrainingEvent> events;  // filled when record_events is set
    double best_valid_nll = 0.0;
    bool stopped_early = false;
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(const std::string& what, MetricTrace trace) : std::runtime_error(what), trace_(std::move(trace)) {}
    const MetricTrace& trace() const noexcept { return trace_; }

private:
    MetricTrace trace_;
};

TrainResult train(NadeModel model, const BinaryDataset& dataset, const TrainConfig& config);

}  // namespace oanade
