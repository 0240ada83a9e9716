#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oanade/combinatorics.hpp"
#include "oanade/numerics.hpp"

namespace oanade {

enum class Activation { ReLU, Sigmoid };

std::string to_string(Activation activation);
Activation parse_activation(const std::string& text);

// Weights of the mask-conditioned network, also used as the gradient container.
// Declared order (w1, b1, w2, b2, w3, b3) is the checkpoint order.
struct Parameters {
    Matrix w1;  // H1 x 2D
    Matrix b1;  // H1 x 1
    Matrix w2;  // H2 x H1
    Matrix b2;  // H2 x 1
    Matrix w3;  // D x H2
    Matrix b3;  // D x 1

    static Parameters zeros(std::size_t dimension, std::size_t hidden1, std::size_t hidden2);
    Parameters zeros_like() const;

    std::array<Matrix*, 6> tensors() noexcept { return {&w1, &b1, &w2, &b2, &w3, &b3}; }
    std::array<const Matrix*, 6> tensors() const noexcept { return {&w1, &b1, &w2, &b2, &w3, &b3}; }
    static constexpr std::array<const char*, 6> names{"w1", "b1", "w2", "b2", "w3", "b3"};

    std::size_t count() const noexcept;
    bool same_shapes(const Parameters& other) const noexcept;
    bool all_finite() const noexcept;
    void add_scaled(const Parameters& other, double scale);
    void scale(double factor) noexcept;

    ParameterList to_list() const;
    static Parameters from_list(const ParameterList& list);

    friend bool operator==(const Parameters&, const Parameters&) = default;
};

// Two-hidden-layer network mapping (x * m, m) to D Bernoulli logits.
struct NadeModel {
    std::size_t dimension = 0;
    std::size_t hidden1 = 0;
    std::size_t hidden2 = 0;
    std::uint64_t seed = 0;
    Activation activation = Activation::ReLU;
    Parameters params;

    friend bool operator==(const NadeModel&, const NadeModel&) = default;
};

// Uniform(-s, s) weights with s = sqrt(6 / (fan_in + fan_out)); zero biases.
NadeModel init_model(std::size_t dimension, std::size_t hidden1, std::size_t hidden2, std::uint64_t seed,
                     Activation activation = Activation::ReLU);

struct ForwardTrace {
    std::vector<double> input;  // length 2D: masked values then mask bits
    std::vector<double> pre1, act1;
    std::vector<double> pre2, act2;
    Matrix logits;  // D x 1
};

// One network inference. `mask` marks the conditioned variables; values of
// x outside the mask never reach the network.
ForwardTrace forward(const NadeModel& model, std::span<const Bit> x, std::span<const Bit> mask);
ForwardTrace forward(const NadeModel& model, std::span<const Bit> x, const ObservedSet& mask);

// Gradient of sum_i logits[i] * logit_grads[i] with respect to every parameter.
Parameters backward(const NadeModel& model, const ForwardTrace& trace, const Matrix& logit_grads);
// Accumulating variant: grads += scale * (gradient above).
void accumulate_backward(const NadeModel& model, const ForwardTrace& trace, std::span<const double> logit_grads,
                         Parameters& grads, double scale = 1.0);

// Text checkpoint, layout documented in README.md.
void write_checkpoint(const NadeModel& model, std::ostream& out);
NadeModel read_checkpoint(std::istream& in, const std::string& source = "<stream>");
void save_checkpoint(const NadeModel& model, const std::filesystem::path& path);
NadeModel load_checkpoint(const std::filesystem::path& path);

}  // namespace oanade
