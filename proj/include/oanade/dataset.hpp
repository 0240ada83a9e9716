#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "oanade/combinatorics.hpp"

namespace oanade {

// N x D matrix of bits, row-major.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const Bit> row(std::size_t r) const noexcept { return {bits_.data() + r * cols_, cols_}; }
    std::span<Bit> row(std::size_t r) noexcept { return {bits_.data() + r * cols_, cols_}; }
    Bit operator()(std::size_t r, std::size_t c) const noexcept { return bits_[r * cols_ + c]; }
    Bit& operator()(std::size_t r, std::size_t c) noexcept { return bits_[r * cols_ + c]; }

    void append_row(std::span<const Bit> values);

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Bit> bits_;
};

enum class Split { Train, Valid, Test };
std::string to_string(Split split);
Split parse_split(const std::string& text);

struct BinaryDataset {
    std::string name;
    std::size_t dimension = 0;
    BitMatrix train;
    BitMatrix valid;
    BitMatrix test;

    const BitMatrix& split(Split s) const;

    friend bool operator==(const BinaryDataset&, const BinaryDataset&) = default;
};

// Parses one split file: one example per line, whitespace-separated 0/1
// tokens, blank lines ignored. Throws ParseError / FormatError with the line.
BitMatrix load_split(const std::filesystem::path& path);
void save_split(const BitMatrix& split, const std::filesystem::path& path);

// Reads train.txt, valid.txt and test.txt from `dir`.
BinaryDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const BinaryDataset& dataset, const std::filesystem::path& dir);

struct IndependentBernoulli {
    std::vector<double> p;  // P(x_i = 1)
};

struct MixtureOfProducts {
    std::vector<double> weights;        // sums to 1
    std::vector<std::vector<double>> p;  // p[component][i]
};

using SyntheticKind = std::variant<IndependentBernoulli, MixtureOfProducts>;

struct SyntheticDataset {
    BinaryDataset data;
    SyntheticKind truth;
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t valid = 0;
    std::size_t test = 0;
};

SyntheticDataset make_synthetic(const SyntheticKind& kind, SplitSizes sizes, std::uint64_t seed,
                                std::string name = "synthetic");

std::size_t dimension_of(const SyntheticKind& kind);

// Exact -log p(x_missing | x_obs) under the generating distribution.
double true_completion_nll(const SyntheticKind& kind, std::span<const Bit> x, const ObservedSet& obs);

// E_obs~dist [ sum_{i missing} H(p_i) ]: the best achievable mean completion
// NLL for independent variables.
double expected_optimal_completion_nll(const IndependentBernoulli& truth, const QueryDistribution& dist);

}  // namespace oanade
