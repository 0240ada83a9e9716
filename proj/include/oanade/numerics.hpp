#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace oanade {

// Dense row-major matrix of doubles. Column vectors are (n x 1) matrices.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix column(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    bool same_shape(const Matrix& other) const noexcept { return rows_ == other.rows_ && cols_ == other.cols_; }
    bool all_finite() const noexcept;

    void fill(double value) noexcept;
    // this += scale * other; shapes must match.
    void add_scaled(const Matrix& other, double scale);
    void scale(double factor) noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Standard product. Inner sums run left to right over k.
Matrix matmul(const Matrix& a, const Matrix& b);

// y = a * x, summed left to right. Sizes are checked.
void matvec(const Matrix& a, std::span<const double> x, std::span<double> y);
// y = a^T * x, each y[j] accumulated over rows in increasing order.
void matvec_transposed(const Matrix& a, std::span<const double> x, std::span<double> y);
// a += scale * u v^T
void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v, double scale = 1.0);

double sigmoid(double z) noexcept;
// log(sigmoid(z)) without forming sigmoid(z).
double log_sigmoid(double z) noexcept;

// Negative log-likelihood of bit `x` under Bernoulli(sigmoid(logit)).
double bernoulli_nll(double logit, int x) noexcept;
// d/dlogit of bernoulli_nll.
double bernoulli_nll_grad(double logit, int x) noexcept;

// -log(mean(exp(log_values))) with a max shift. Empty input is an error.
double negative_log_mean_exp(std::span<const double> log_values);

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_parameter_index = 0;  // flat index across all parameter matrices
    std::size_t num_parameters = 0;
};

using ParameterList = std::vector<Matrix>;

// Returns the loss at `params`; when `gradients` is non-null, also writes the
// analytic gradient (one matrix per parameter, same shapes).
using GradientFunction = std::function<double(const ParameterList& params, ParameterList* gradients)>;

// Compares the analytic gradient against central differences
// (f(p+h) - f(p-h)) / 2h for every scalar parameter. Relative error uses
// max(|analytic|, |numeric|, 1e-8) as the denominator.
GradCheckReport check_gradient(const GradientFunction& loss, const ParameterList& params, double step);

}  // namespace oanade
