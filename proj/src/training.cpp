#include "oanade/training.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "oanade/errors.hpp"
#include "oanade/io_util.hpp"

namespace oanade {

namespace {

enum SeedStream : std::uint64_t { kValidQueries = 1, kOrderings = 2, kTraining = 3 };

}  // namespace

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& text) {
    if (text == "adam") return OptimizerKind::Adam;
    if (text == "sgd") return OptimizerKind::SGD;
    throw InvalidArgument("unknown optimizer '" + text + "'");
}

void adam_step(Parameters& params, const Parameters& grads, AdamState& state, double learning_rate,
               const AdamConfig& config) {
    if (!params.same_shapes(grads)) throw InvalidArgument("adam_step: gradient shape mismatch");
    if (state.step == 0 && state.m.count() == 0) {
        state.m = params.zeros_like();
        state.v = params.zeros_like();
    }
    if (!params.same_shapes(state.m) || !params.same_shapes(state.v)) throw InvalidArgument("adam_step: state shape mismatch");

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = state.m.tensors();
    auto v = state.v.tensors();
    for (std::size_t k = 0; k < p.size(); ++k) {
        for (std::size_t i = 0; i < p[k]->size(); ++i) {
            const double gi = (*g[k])[i];
            double& mi = (*m[k])[i];
            double& vi = (*v[k])[i];
            mi = config.beta1 * mi + (1.0 - config.beta1) * gi;
            vi = config.beta2 * vi + (1.0 - config.beta2) * gi * gi;
            const double m_hat = mi / c1;
            const double v_hat = vi / c2;
            (*p[k])[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
    }
}

void sgd_step(Parameters& params, const Parameters& grads, double learning_rate) {
    if (!params.same_shapes(grads)) throw InvalidArgument("sgd_step: gradient shape mismatch");
    params.add_scaled(grads, -learning_rate);
}

QuerySet generate_query_set(const BitMatrix& split, const QueryDistribution& dist, std::size_t n_queries,
                            std::uint64_t seed) {
    if (split.empty()) throw InvalidArgument("generate_query_set: empty split");
    const std::size_t D = split.cols();
    dist.validate(D);
    QuerySet out;
    out.seed = seed;
    out.distribution = dist;
    out.dimension = D;
    out.queries.reserve(n_queries);
    Rng rng(seed);
    for (std::size_t q = 0; q < n_queries; ++q) {
        const std::size_t row = uniform_index(rng, split.rows());
        ObservedSet obs = sample_query(dist, D, rng);
        const auto x = split.row(row);
        out.queries.push_back({row, BitVector(x.begin(), x.end()), std::move(obs)});
    }
    return out;
}

std::string format_query_set(const QuerySet& set) {
    std::ostringstream os;
    os << "# queries seed=" << set.seed << " dist=" << set.distribution.to_string() << " d=" << set.dimension
       << " n=" << set.size() << '\n';
    for (const Query& q : set.queries) {
        os << q.row;
        for (std::size_t i : q.obs.members()) os << ' ' << i;
        os << '\n';
    }
    return os.str();
}

void save_query_set(const QuerySet& set, const std::filesystem::path& path) {
    write_file_atomic(path, format_query_set(set));
}

QuerySet load_query_set(const std::filesystem::path& path, const BitMatrix& split) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open query file " + path.string());
    QuerySet out;
    out.dimension = split.cols();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind('#', 0) == 0) {
            std::istringstream hs(line.substr(1));
            std::string field;
            while (hs >> field) {
                if (field.rfind("seed=", 0) == 0) out.seed = std::stoull(field.substr(5));
                if (field.rfind("dist=", 0) == 0) out.distribution = QueryDistribution::parse(field.substr(5));
                if (field.rfind("d=", 0) == 0 && parse_size(field.substr(2), "d") != split.cols()) {
                    throw FormatError(path.string() + ": query set dimension differs from split");
                }
            }
            continue;
        }
        std::istringstream ls(line);
        std::string token;
        std::vector<std::size_t> values;
        try {
            while (ls >> token) values.push_back(parse_size(token, "query index"));
        } catch (const InvalidArgument& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        if (values.empty()) continue;
        if (values.front() >= split.rows()) throw ParseError(path.string(), line_no, "row index out of range");
        Query q;
        q.row = values.front();
        const auto x = split.row(q.row);
        q.x.assign(x.begin(), x.end());
        try {
            q.obs = ObservedSet(split.cols(), std::vector<std::size_t>(values.begin() + 1, values.end()));
        } catch (const InvalidArgument& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        if (q.obs.is_full()) throw ParseError(path.string(), line_no, "query has no missing variable");
        out.queries.push_back(std::move(q));
    }
    return out;
}

LossValue completion_nll_with_cost(const NadeModel& model, std::span<const Bit> x, const ObservedSet& obs,
                                   const OrderingSet& orderings) {
    if (obs.dimension() != model.dimension) throw InvalidArgument("completion_nll: obs dimension mismatch");
    if (obs.is_full()) throw InvalidArgument("completion_nll: obs covers every variable");
    if (orderings.k() == 0) throw InvalidArgument("completion_nll: empty ordering set");
    std::vector<double> log_p;
    log_p.reserve(orderings.k());
    LossValue out;
    for (const Ordering& o : orderings.orderings) {
        const LossValue chain = chain_rule_nll(model, x, obs, o);
        log_p.push_back(-chain.value);
        out.computations += chain.computations;
    }
    out.value = negative_log_mean_exp(log_p);
    return out;
}

double completion_nll(const NadeModel& model, std::span<const Bit> x, const ObservedSet& obs,
                      const OrderingSet& orderings) {
    return completion_nll_with_cost(model, x, obs, orderings).value;
}

LossValue evaluate_with_cost(const NadeModel& model, const QuerySet& queries, const OrderingSet& orderings) {
    if (queries.empty()) throw InvalidArgument("evaluate: empty query set");
    LossValue out;
    double sum = 0.0;
    for (const Query& q : queries.queries) {
        const LossValue one = completion_nll_with_cost(model, q.x, q.obs, orderings);
        sum += one.value;
        out.computations += one.computations;
    }
    out.value = sum / static_cast<double>(queries.size());
    return out;
}

double evaluate(const NadeModel& model, const QuerySet& queries, const OrderingSet& orderings) {
    return evaluate_with_cost(model, queries, orderings).value;
}

BitVector impute(const NadeModel& model, std::span<const Bit> x_obs, const ObservedSet& obs, const Ordering& ordering,
                 Rng& rng) {
    if (x_obs.size() != model.dimension || obs.dimension() != model.dimension) {
        throw InvalidArgument("impute: dimension mismatch");
    }
    if (obs.is_full()) throw InvalidArgument("impute: nothing to impute");
    BitVector x(model.dimension, 0);
    for (std::size_t i : obs.members()) x[i] = x_obs[i] != 0 ? 1 : 0;
    BitVector mask = obs.indicator();
    for (std::size_t v : ordering.missing_in_order(obs)) {
        const ForwardTrace trace = forward(model, x, mask);
        x[v] = uniform_unit(rng) < sigmoid(trace.logits[v]) ? 1 : 0;
        mask[v] = 1;
    }
    return x;
}

std::string MetricTrace::to_csv() const {
    std::string out = std::string(csv_header) + '\n';
    for (const MetricRow& r : rows) {
        out += format_double(r.computations_over_d) + ',' + format_double(r.train_loss) + ',' + format_double(r.valid_nll) + '\n';
    }
    return out;
}

void MetricTrace::save_csv(const std::filesystem::path& path) const { write_file_atomic(path, to_csv()); }

MetricTrace MetricTrace::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open trace " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != csv_header) throw FormatError(path.string() + ": missing trace header");
    MetricTrace trace;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
            throw ParseError(path.string(), line_no, "expected three columns");
        }
        auto num = [&](const std::string& s) {
            if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
            try {
                return parse_double(s, "trace value");
            } catch (const InvalidArgument& e) {
                throw ParseError(path.string(), line_no, e.what());
            }
        };
        trace.rows.push_back({num(a), num(b), num(c)});
    }
    return trace;
}

void TrainConfig::validate() const {
    if (budget == 0) throw InvalidArgument("train: budget must be positive");
    if (!(learning_rate > 0.0)) throw InvalidArgument("train: learning rate must be positive");
    if (batch_size == 0) throw InvalidArgument("train: batch size must be positive");
    if (eval_every == 0) throw InvalidArgument("train: eval_every must be positive");
    if (k == 0) throw InvalidArgument("train: K must be at least 1");
    if (valid_queries == 0) throw InvalidArgument("train: need at least one validation query");
    if (orderings && orderings->k() == 0) throw InvalidArgument("train: empty ordering set");
}

TrainResult train(NadeModel model, const BinaryDataset& dataset, const TrainConfig& config) {
    config.validate();
    const std::size_t D = model.dimension;
    if (dataset.dimension != D) {
        throw InvalidArgument("train: dataset D=" + std::to_string(dataset.dimension) + " but model D=" + std::to_string(D));
    }
    if (dataset.train.empty()) throw InvalidArgument("train: empty training split");
    if (dataset.valid.empty()) throw InvalidArgument("train: empty validation split");
    config.query_dist.validate(D);

    TrainResult result;
    result.orderings = config.orderings ? *config.orderings
                                        : sample_ordering_set(D, config.k, derive_seed(config.seed, kOrderings));
    if (result.orderings.dimension() != D) throw InvalidArgument("train: ordering set dimension mismatch");
    result.valid_queries = generate_query_set(dataset.valid, config.query_dist, config.valid_queries,
                                              derive_seed(config.seed, kValidQueries));

    const SamplingConfig sampling{config.procedure, &result.orderings, config.query_dist};
    const double dim = static_cast<double>(D);

    auto validate_now = [&](const NadeModel& m) {
        const LossValue v = evaluate_with_cost(m, result.valid_queries, result.orderings);
        result.ledger.evaluation_inferences += v.computations;
        return v.value;
    };

    NadeModel best = model;
    double best_valid = validate_now(model);
    result.trace.rows.push_back({0.0, std::numeric_limits<double>::quiet_NaN(), best_valid});
    std::size_t evals_since_best = 0;

    Rng rng(derive_seed(config.seed, kTraining));
    AdamState adam;
    std::vector<std::span<const Bit>> batch(config.batch_size);
    std::uint64_t& used = result.ledger.training_inferences;
    std::uint64_t next_eval = config.eval_every;
    double loss_sum = 0.0;
    std::size_t loss_batches = 0;

    auto record = [&](double valid) {
        result.trace.rows.push_back({static_cast<double>(used) / dim, loss_sum / static_cast<double>(loss_batches), valid});
        loss_sum = 0.0;
        loss_batches = 0;
    };

    while (used + config.batch_size <= config.budget) {
        for (auto& x : batch) x = dataset.train.row(uniform_index(rng, dataset.train.rows()));
        BatchResult step = minibatch_step(model, batch, sampling, rng);
        used += step.loss.computations;
        if (!std::isfinite(step.loss.value) || !step.gradients.all_finite()) {
            throw TrainingDiverged("train: non-finite loss after " + std::to_string(used) + " inferences", result.trace);
        }
        if (config.record_events) {
            for (const auto& c : step.contexts) result.events.push_back(c.event());
        }
        loss_sum += step.loss.value;
        ++loss_batches;

        if (config.optimizer == OptimizerKind::Adam) {
            adam_step(model.params, step.gradients, adam, config.learning_rate, config.adam);
        } else {
            sgd_step(model.params, step.gradients, config.learning_rate);
        }

        if (used >= next_eval) {
            next_eval = (used / config.eval_every + 1) * config.eval_every;
            const double valid = validate_now(model);
            if (!std::isfinite(valid)) throw TrainingDiverged("train: non-finite validation NLL", result.trace);
            record(valid);
            if (valid < best_valid) {
                best_valid = valid;
                best = model;
                evals_since_best = 0;
            } else if (config.early_stop_patience > 0 && ++evals_since_best >= config.early_stop_patience) {
                result.stopped_early = true;
                break;
            }
        }
    }

    if (loss_batches > 0) {
        const double valid = validate_now(model);
        record(valid);
        if (valid < best_valid) {
            best_valid = valid;
            best = model;
        }
    }

    result.model = std::move(best);
    result.best_valid_nll = best_valid;
    return result;
}

}  // namespace oanade
