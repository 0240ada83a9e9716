#include "oanade/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "oanade/errors.hpp"
#include "oanade/io_util.hpp"
#include "oanade/numerics.hpp"

namespace oanade {

void BitMatrix::append_row(std::span<const Bit> values) {
    if (rows_ == 0 && bits_.empty()) cols_ = values.size();
    if (values.size() != cols_) throw InvalidArgument("BitMatrix::append_row: width mismatch");
    bits_.insert(bits_.end(), values.begin(), values.end());
    ++rows_;
}

std::string to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Valid: return "valid";
        case Split::Test: return "test";
    }
    return "?";
}

Split parse_split(const std::string& text) {
    if (text == "train") return Split::Train;
    if (text == "valid") return Split::Valid;
    if (text == "test") return Split::Test;
    throw InvalidArgument("unknown split '" + text + "'");
}

const BitMatrix& BinaryDataset::split(Split s) const {
    switch (s) {
        case Split::Train: return train;
        case Split::Valid: return valid;
        case Split::Test: return test;
    }
    return train;
}

BitMatrix load_split(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open split file " + path.string());
    BitMatrix out;
    std::string line;
    std::size_t line_no = 0;
    BitVector row;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string token;
        row.clear();
        while (ls >> token) {
            if (token == "0") {
                row.push_back(0);
            } else if (token == "1") {
                row.push_back(1);
            } else {
                throw ParseError(path.string(), line_no, "non-binary token '" + token + "'");
            }
        }
        if (row.empty()) continue;
        if (out.rows() > 0 && row.size() != out.cols()) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": line has " + std::to_string(row.size()) +
                              " values, expected " + std::to_string(out.cols()));
        }
        out.append_row(row);
    }
    return out;
}

void save_split(const BitMatrix& split, const std::filesystem::path& path) {
    std::string text;
    text.reserve(split.rows() * (2 * split.cols() + 1));
    for (std::size_t r = 0; r < split.rows(); ++r) {
        for (std::size_t c = 0; c < split.cols(); ++c) {
            if (c) text += ' ';
            text += split(r, c) ? '1' : '0';
        }
        text += '\n';
    }
    write_file_atomic(path, text);
}

BinaryDataset load_dataset(const std::filesystem::path& dir) {
    BinaryDataset ds;
    ds.name = dir.filename().string();
    if (ds.name.empty()) ds.name = dir.parent_path().filename().string();
    ds.train = load_split(dir / "train.txt");
    ds.valid = load_split(dir / "valid.txt");
    ds.test = load_split(dir / "test.txt");
    if (ds.train.empty()) throw FormatError(dir.string() + ": train split is empty");
    ds.dimension = ds.train.cols();
    for (const auto* s : {&ds.valid, &ds.test}) {
        if (!s->empty() && s->cols() != ds.dimension) {
            throw FormatError(dir.string() + ": splits disagree on dimension (" + std::to_string(ds.dimension) + " vs " +
                              std::to_string(s->cols()) + ")");
        }
    }
    return ds;
}

void save_dataset(const BinaryDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_split(dataset.train, dir / "train.txt");
    save_split(dataset.valid, dir / "valid.txt");
    save_split(dataset.test, dir / "test.txt");
}

namespace {

void check_probability(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("synthetic: probabilities must lie in (0,1)");
}

void validate(const SyntheticKind& kind) {
    if (const auto* ib = std::get_if<IndependentBernoulli>(&kind)) {
        if (ib->p.empty()) throw InvalidArgument("synthetic: empty probability vector");
        for (double p : ib->p) check_probability(p);
        return;
    }
    const auto& mix = std::get<MixtureOfProducts>(kind);
    if (mix.weights.empty() || mix.weights.size() != mix.p.size()) {
        throw InvalidArgument("synthetic: mixture needs one probability row per weight");
    }
    double total = 0.0;
    for (double w : mix.weights) {
        if (!(w > 0.0)) throw InvalidArgument("synthetic: mixture weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("synthetic: mixture weights must sum to 1");
    const std::size_t D = mix.p.front().size();
    if (D == 0) throw InvalidArgument("synthetic: empty probability vector");
    for (const auto& row : mix.p) {
        if (row.size() != D) throw InvalidArgument("synthetic: ragged mixture probabilities");
        for (double p : row) check_probability(p);
    }
}

void sample_rows(const SyntheticKind& kind, std::size_t n, Rng& rng, BitMatrix& out) {
    const std::size_t D = dimension_of(kind);
    out = BitMatrix(n, D);
    for (std::size_t r = 0; r < n; ++r) {
        const std::vector<double>* p = nullptr;
        if (const auto* ib = std::get_if<IndependentBernoulli>(&kind)) {
            p = &ib->p;
        } else {
            const auto& mix = std::get<MixtureOfProducts>(kind);
            const double u = uniform_unit(rng);
            double acc = 0.0;
            std::size_t c = 0;
            for (; c + 1 < mix.weights.size(); ++c) {
                acc += mix.weights[c];
                if (u < acc) break;
            }
            p = &mix.p[c];
        }
        for (std::size_t i = 0; i < D; ++i) out(r, i) = uniform_unit(rng) < (*p)[i] ? 1 : 0;
    }
}

double bernoulli_log(double p, Bit x) { return x ? std::log(p) : std::log1p(-p); }

double entropy(double p) { return -(p * std::log(p) + (1.0 - p) * std::log1p(-p)); }

}  // namespace

std::size_t dimension_of(const SyntheticKind& kind) {
    if (const auto* ib = std::get_if<IndependentBernoulli>(&kind)) return ib->p.size();
    const auto& mix = std::get<MixtureOfProducts>(kind);
    return mix.p.empty() ? 0 : mix.p.front().size();
}

SyntheticDataset make_synthetic(const SyntheticKind& kind, SplitSizes sizes, std::uint64_t seed, std::string name) {
    validate(kind);
    if (sizes.train == 0) throw InvalidArgument("make_synthetic: train split must be nonempty");
    SyntheticDataset out;
    out.truth = kind;
    out.data.name = std::move(name);
    out.data.dimension = dimension_of(kind);
    Rng rng(derive_seed(seed, 0));
    sample_rows(kind, sizes.train, rng, out.data.train);
    sample_rows(kind, sizes.valid, rng, out.data.valid);
    sample_rows(kind, sizes.test, rng, out.data.test);
    return out;
}

double true_completion_nll(const SyntheticKind& kind, std::span<const Bit> x, const ObservedSet& obs) {
    const std::size_t D = dimension_of(kind);
    if (x.size() != D || obs.dimension() != D) throw InvalidArgument("true_completion_nll: dimension mismatch");
    const auto missing = obs.complement();
    if (const auto* ib = std::get_if<IndependentBernoulli>(&kind)) {
        double nll = 0.0;
        for (std::size_t i : missing) nll -= bernoulli_log(ib->p[i], x[i]);
        return nll;
    }
    // p(x_mis | x_obs) = sum_c w_c p_c(x_obs) p_c(x_mis) / sum_c w_c p_c(x_obs)
    const auto& mix = std::get<MixtureOfProducts>(kind);
    std::vector<double> log_joint, log_obs;
    for (std::size_t c = 0; c < mix.weights.size(); ++c) {
        double lo = std::log(mix.weights[c]);
        for (std::size_t i : obs.members()) lo += bernoulli_log(mix.p[c][i], x[i]);
        double lm = 0.0;
        for (std::size_t i : missing) lm += bernoulli_log(mix.p[c][i], x[i]);
        log_obs.push_back(lo);
        log_joint.push_back(lo + lm);
    }
    // Both terms carry the same 1/C factor, which cancels.
    return negative_log_mean_exp(log_joint) - negative_log_mean_exp(log_obs);
}

double expected_optimal_completion_nll(const IndependentBernoulli& truth, const QueryDistribution& dist) {
    const std::size_t D = truth.p.size();
    dist.validate(D);
    double total_entropy = 0.0;
    for (double p : truth.p) total_entropy += entropy(p);
    using Kind = QueryDistribution::Kind;
    switch (dist.kind) {
        case Kind::PointMassEmpty:
            return total_entropy;
        case Kind::FixedSet: {
            double h = 0.0;
            for (std::size_t i : dist.observed.complement()) h += entropy(truth.p[i]);
            return h;
        }
        case Kind::FixedSize:
        case Kind::FixedSizeHalf: {
            const std::size_t s = dist.kind == Kind::FixedSize ? dist.size : D / 2;
            return total_entropy * static_cast<double>(D - s) / static_cast<double>(D);
        }
        case Kind::UniformSizeUniformSubset: {
            // Each variable is missing with probability E[(D - s) / D], s uniform on {0..D-1}.
            return total_entropy * static_cast<double>(D + 1) / (2.0 * static_cast<double>(D));
        }
        case Kind::UniformSubset: {
            // Among the 2^D - 1 non-full subsets, a given variable is unobserved in 2^(D-1).
            const double all = std::ldexp(1.0, static_cast<int>(D)) - 1.0;
            return total_entropy * std::ldexp(1.0, static_cast<int>(D) - 1) / all;
        }
    }
    return total_entropy;
}

}  // namespace oanade
