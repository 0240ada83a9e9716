#include <doctest.h>

#include <sstream>

#include "oanade/errors.hpp"
#include "oanade/losses.hpp"
#include "oanade/model.hpp"
#include "oracle_util.hpp"

using namespace oanade;
using namespace oanade::testing;

TEST_CASE("init_model is deterministic and shaped") {
    const NadeModel a = init_model(5, 4, 4, 42);
    const NadeModel b = init_model(5, 4, 4, 42);
    CHECK(a == b);
    CHECK(!(a == init_model(5, 4, 4, 43)));
    CHECK(a.params.w1.rows() == 4);
    CHECK(a.params.w1.cols() == 10);
    CHECK(a.params.w3.rows() == 5);
    CHECK(a.params.b1 == Matrix(4, 1));
    CHECK(a.params.b3 == Matrix(5, 1));
    const double s1 = std::sqrt(6.0 / 14.0);
    for (double w : a.params.w1.values()) CHECK(std::abs(w) <= s1);
    CHECK_THROWS_AS(init_model(0, 4, 4, 1), InvalidArgument);
    CHECK_THROWS_AS(init_model(3, 0, 4, 1), InvalidArgument);
}

TEST_CASE("fresh ReLU model on the empty mask yields zero logits") {
    // Input is all zeros and biases are zero, so every layer is zero.
    const NadeModel m = init_model(5, 4, 4, 1);
    const BitVector x(5, 0);
    const ForwardTrace t = forward(m, x, ObservedSet(5));
    CHECK(t.logits == Matrix(5, 1));
}

TEST_CASE("hand-sized model matches scalar evaluation") {
    NadeModel m = init_model(3, 2, 2, 0);
    for (Matrix* w : {&m.params.w1, &m.params.w2, &m.params.w3}) w->fill(0.1);
    const BitVector x{1, 0, 1};
    const ForwardTrace t = forward(m, x, ObservedSet(3, {0}));
    // input (1,0,0, 1,0,0): h1 = relu(0.2) = 0.2 each; h2 = relu(0.04); logits = 0.008.
    for (std::size_t i = 0; i < 3; ++i) CHECK(t.logits[i] == doctest::Approx(0.008).epsilon(1e-14));
    const auto ref = ref_logits(m, x, ObservedSet(3, {0}));
    for (std::size_t i = 0; i < 3; ++i) CHECK(t.logits[i] == doctest::Approx(ref[i]).epsilon(1e-14));
}

TEST_CASE("forward matches the reference evaluator for random models") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        NadeModel m = jittered_model(6, 5, trial);
        if (trial % 2) m.activation = Activation::Sigmoid;
        const BitVector x = random_bits(6, rng);
        const ObservedSet mask(6, random_subset(rng, 6, uniform_index(rng, 7)));
        const ForwardTrace t = forward(m, x, mask);
        const auto ref = ref_logits(m, x, mask);
        for (std::size_t i = 0; i < 6; ++i) CHECK(t.logits[i] == doctest::Approx(ref[i]).epsilon(1e-13));
    }
}

TEST_CASE("masking: unobserved values never reach the network") {
    const NadeModel m = jittered_model(6, 8, 3);
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        BitVector x = random_bits(6, rng);
        const ObservedSet mask(6, random_subset(rng, 6, uniform_index(rng, 6)));
        const Matrix base = forward(m, x, mask).logits;
        for (std::size_t i : mask.complement()) {
            BitVector y = x;
            y[i] ^= 1U;
            REQUIRE(forward(m, y, mask).logits == base);
        }
    }
    // flipping an observed value does change the output
    BitVector x{1, 1, 0, 0, 1, 0};
    const ObservedSet mask(6, {0, 2});
    BitVector y = x;
    y[0] = 0;
    CHECK(!(forward(m, x, mask).logits == forward(m, y, mask).logits));
}

TEST_CASE("forward input validation") {
    const NadeModel m = init_model(3, 2, 2, 0);
    const BitVector x{1, 0};
    CHECK_THROWS_AS(forward(m, x, ObservedSet(3)), InvalidArgument);
    const BitVector bad{1, 2, 0};
    CHECK_THROWS_AS(forward(m, bad, ObservedSet(3)), InvalidArgument);
    const BitVector ok{1, 0, 1};
    const ForwardTrace full = forward(m, ok, ObservedSet::full(3));
    CHECK(full.logits.rows() == 3);
}

TEST_CASE("backward: zero cotangent, output bias, shape errors") {
    const NadeModel m = jittered_model(4, 3, 5);
    const BitVector x{1, 0, 1, 1};
    const ForwardTrace t = forward(m, x, ObservedSet(4, {1}));
    const Parameters zero = backward(m, t, Matrix(4, 1));
    CHECK(zero == m.params.zeros_like());

    const Matrix g = Matrix::from_rows({{0.5}, {-1.25}, {2.0}, {0.0}});
    const Parameters grads = backward(m, t, g);
    CHECK(grads.b3 == g);
    CHECK_THROWS_AS(backward(m, t, Matrix(3, 1)), InvalidArgument);
}

TEST_CASE("backward reproduces the finite-difference Jacobian column by column") {
    for (Activation act : {Activation::ReLU, Activation::Sigmoid}) {
        NadeModel m = jittered_model(5, 4, 21);
        m.activation = act;
        const BitVector x{1, 0, 0, 1, 1};
        const ObservedSet mask(5, {1, 3});
        for (std::size_t out = 0; out < 5; ++out) {
            GradientFunction f = [&](const ParameterList& p, ParameterList* g) {
                NadeModel probe = m;
                probe.params = Parameters::from_list(p);
                const ForwardTrace t = forward(probe, x, mask);
                if (g) {
                    Matrix onehot(5, 1);
                    onehot[out] = 1.0;
                    *g = backward(probe, t, onehot).to_list();
                }
                return t.logits[out];
            };
            const auto report = check_gradient(f, m.params.to_list(), 1e-5);
            CHECK(report.num_parameters == m.params.count());
            CHECK(report.max_relative_error <= 1e-5);
        }
    }
}

TEST_CASE("checkpoint round trip is exact and validated") {
    NadeModel m = jittered_model(4, 3, 9);
    m.activation = Activation::Sigmoid;
    std::stringstream ss;
    write_checkpoint(m, ss);
    const std::string text = ss.str();
    CHECK(text.rfind("oanade-checkpoint v1\n", 0) == 0);
    const NadeModel back = read_checkpoint(ss);
    CHECK(back == m);

    std::stringstream again;
    write_checkpoint(back, again);
    CHECK(again.str() == text);

    std::stringstream bad("oanade-checkpoint v2\n");
    CHECK_THROWS_AS(read_checkpoint(bad), FormatError);
    std::stringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(read_checkpoint(truncated), FormatError);
}
