#include "oanade/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oanade/errors.hpp"

namespace oanade {

namespace {

std::string shape_string(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw InvalidArgument("Matrix: data length does not match shape");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw InvalidArgument("Matrix::from_rows: ragged rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
}

Matrix Matrix::column(std::span<const double> values) {
    return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

void Matrix::add_scaled(const Matrix& other, double scale) {
    if (!same_shape(other)) throw InvalidArgument("Matrix::add_scaled: shape mismatch " + shape_string(*this) + " vs " + shape_string(other));
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

void Matrix::scale(double factor) noexcept {
    for (double& v : data_) v *= factor;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw InvalidArgument("matmul: dimension mismatch " + shape_string(a) + " x " + shape_string(b));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) sum += a(i, k) * b(k, j);
            out(i, j) = sum;
        }
    }
    return out;
}

void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.cols() || y.size() != a.rows()) throw InvalidArgument("matvec: dimension mismatch");
    const double* row = a.values().data();
    for (std::size_t i = 0; i < a.rows(); ++i, row += a.cols()) {
        double sum = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k) sum += row[k] * x[k];
        y[i] = sum;
    }
}

void matvec_transposed(const Matrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.rows() || y.size() != a.cols()) throw InvalidArgument("matvec_transposed: dimension mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    const double* row = a.values().data();
    for (std::size_t i = 0; i < a.rows(); ++i, row += a.cols()) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += row[j] * xi;
    }
}

void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v, double scale) {
    if (u.size() != a.rows() || v.size() != a.cols()) throw InvalidArgument("add_outer: dimension mismatch");
    double* row = a.values().data();
    for (std::size_t i = 0; i < a.rows(); ++i, row += a.cols()) {
        const double ui = scale * u[i];
        if (ui == 0.0) continue;
        for (std::size_t j = 0; j < a.cols(); ++j) row[j] += ui * v[j];
    }
}

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double log_sigmoid(double z) noexcept {
    if (z >= 0.0) return -std::log1p(std::exp(-z));
    return z - std::log1p(std::exp(z));
}

double bernoulli_nll(double logit, int x) noexcept {
    return x != 0 ? -log_sigmoid(logit) : -log_sigmoid(-logit);
}

double bernoulli_nll_grad(double logit, int x) noexcept {
    return x != 0 ? -sigmoid(-logit) : sigmoid(logit);
}

double negative_log_mean_exp(std::span<const double> log_values) {
    if (log_values.empty()) throw InvalidArgument("negative_log_mean_exp: empty input");
    const double shift = *std::max_element(log_values.begin(), log_values.end());
    if (!std::isfinite(shift)) return -shift;
    double sum = 0.0;
    for (double v : log_values) sum += std::exp(v - shift);
    return -(shift + std::log(sum / static_cast<double>(log_values.size())));
}

GradCheckReport check_gradient(const GradientFunction& loss, const ParameterList& params, double step) {
    if (!(step > 0.0)) throw InvalidArgument("check_gradient: step must be positive");
    GradCheckReport report;
    for (const auto& p : params) report.num_parameters += p.size();
    if (report.num_parameters == 0) return report;

    ParameterList analytic;
    const double base = loss(params, &analytic);
    if (!std::isfinite(base)) throw EvaluationError("check_gradient: non-finite loss");
    if (analytic.size() != params.size()) throw InvalidArgument("check_gradient: gradient count mismatch");
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (!analytic[t].same_shape(params[t])) throw InvalidArgument("check_gradient: gradient shape mismatch");
    }

    ParameterList probe = params;
    std::size_t flat = 0;
    for (std::size_t t = 0; t < probe.size(); ++t) {
        for (std::size_t i = 0; i < probe[t].size(); ++i, ++flat) {
            const double original = probe[t][i];
            probe[t][i] = original + step;
            const double plus = loss(probe, nullptr);
            probe[t][i] = original - step;
            const double minus = loss(probe, nullptr);
            probe[t][i] = original;
            if (!std::isfinite(plus) || !std::isfinite(minus)) throw EvaluationError("check_gradient: non-finite loss");

            const double numeric = (plus - minus) / (2.0 * step);
            const double exact = analytic[t][i];
            const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
            const double rel = std::abs(exact - numeric) / denom;
            if (rel > report.max_relative_error) {
                report.max_relative_error = rel;
                report.worst_parameter_index = flat;
            }
        }
    }
    return report;
}

}  // namespace oanade
