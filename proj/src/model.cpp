#include "oanade/model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "oanade/errors.hpp"
#include "oanade/io_util.hpp"

namespace oanade {

namespace {

constexpr const char* kCheckpointMagic = "oanade-checkpoint";
constexpr int kCheckpointVersion = 1;

double activate(Activation a, double z) noexcept {
    return a == Activation::ReLU ? (z > 0.0 ? z : 0.0) : sigmoid(z);
}

// Derivative expressed through pre- and post-activation values. ReLU'(0) = 0.
double activate_grad(Activation a, double pre, double post) noexcept {
    return a == Activation::ReLU ? (pre > 0.0 ? 1.0 : 0.0) : post * (1.0 - post);
}

void init_uniform(Matrix& w, Rng& rng) {
    const double s = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (2.0 * uniform_unit(rng) - 1.0) * s;
}

}  // namespace

std::string to_string(Activation activation) { return activation == Activation::ReLU ? "relu" : "sigmoid"; }

Activation parse_activation(const std::string& text) {
    if (text == "relu") return Activation::ReLU;
    if (text == "sigmoid") return Activation::Sigmoid;
    throw InvalidArgument("unknown activation '" + text + "'");
}

Parameters Parameters::zeros(std::size_t dimension, std::size_t hidden1, std::size_t hidden2) {
    return {Matrix(hidden1, 2 * dimension), Matrix(hidden1, 1), Matrix(hidden2, hidden1),
            Matrix(hidden2, 1),             Matrix(dimension, hidden2), Matrix(dimension, 1)};
}

Parameters Parameters::zeros_like() const {
    return {Matrix(w1.rows(), w1.cols()), Matrix(b1.rows(), 1), Matrix(w2.rows(), w2.cols()),
            Matrix(b2.rows(), 1),         Matrix(w3.rows(), w3.cols()), Matrix(b3.rows(), 1)};
}

std::size_t Parameters::count() const noexcept {
    std::size_t n = 0;
    for (const Matrix* m : tensors()) n += m->size();
    return n;
}

bool Parameters::same_shapes(const Parameters& other) const noexcept {
    auto a = tensors();
    auto b = other.tensors();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i]->same_shape(*b[i])) return false;
    }
    return true;
}

bool Parameters::all_finite() const noexcept {
    for (const Matrix* m : tensors()) {
        if (!m->all_finite()) return false;
    }
    return true;
}

void Parameters::add_scaled(const Parameters& other, double scale) {
    auto a = tensors();
    auto b = other.tensors();
    for (std::size_t i = 0; i < a.size(); ++i) a[i]->add_scaled(*b[i], scale);
}

void Parameters::scale(double factor) noexcept {
    for (Matrix* m : tensors()) m->scale(factor);
}

ParameterList Parameters::to_list() const {
    ParameterList out;
    for (const Matrix* m : tensors()) out.push_back(*m);
    return out;
}

Parameters Parameters::from_list(const ParameterList& list) {
    if (list.size() != 6) throw InvalidArgument("Parameters::from_list: expected 6 matrices");
    return {list[0], list[1], list[2], list[3], list[4], list[5]};
}

NadeModel init_model(std::size_t dimension, std::size_t hidden1, std::size_t hidden2, std::uint64_t seed,
                     Activation activation) {
    if (dimension == 0 || hidden1 == 0 || hidden2 == 0) throw InvalidArgument("init_model: dimensions must be positive");
    NadeModel model{dimension, hidden1, hidden2, seed, activation, Parameters::zeros(dimension, hidden1, hidden2)};
    Rng rng(derive_seed(seed, 0));
    init_uniform(model.params.w1, rng);
    init_uniform(model.params.w2, rng);
    init_uniform(model.params.w3, rng);
    return model;
}

ForwardTrace forward(const NadeModel& model, std::span<const Bit> x, std::span<const Bit> mask) {
    const std::size_t D = model.dimension;
    if (x.size() != D || mask.size() != D) {
        throw InvalidArgument("forward: expected vectors of length " + std::to_string(D) + ", got " +
                              std::to_string(x.size()) + " and " + std::to_string(mask.size()));
    }
    const Parameters& p = model.params;
    ForwardTrace t;
    t.input.assign(2 * D, 0.0);
    for (std::size_t i = 0; i < D; ++i) {
        if (x[i] > 1) throw InvalidArgument("forward: x must be binary");
        const double m = mask[i] != 0 ? 1.0 : 0.0;
        t.input[i] = m * static_cast<double>(x[i]);
        t.input[D + i] = m;
    }

    t.pre1.resize(model.hidden1);
    matvec(p.w1, t.input, t.pre1);
    t.act1.resize(model.hidden1);
    for (std::size_t j = 0; j < model.hidden1; ++j) {
        t.pre1[j] += p.b1[j];
        t.act1[j] = activate(model.activation, t.pre1[j]);
    }

    t.pre2.resize(model.hidden2);
    matvec(p.w2, t.act1, t.pre2);
    t.act2.resize(model.hidden2);
    for (std::size_t j = 0; j < model.hidden2; ++j) {
        t.pre2[j] += p.b2[j];
        t.act2[j] = activate(model.activation, t.pre2[j]);
    }

    t.logits = Matrix(D, 1);
    matvec(p.w3, t.act2, t.logits.values());
    for (std::size_t i = 0; i < D; ++i) t.logits[i] += p.b3[i];
    return t;
}

ForwardTrace forward(const NadeModel& model, std::span<const Bit> x, const ObservedSet& mask) {
    if (mask.dimension() != model.dimension) throw InvalidArgument("forward: mask dimension mismatch");
    const BitVector indicator = mask.indicator();
    return forward(model, x, indicator);
}

void accumulate_backward(const NadeModel& model, const ForwardTrace& trace, std::span<const double> logit_grads,
                         Parameters& grads, double scale) {
    if (logit_grads.size() != model.dimension || trace.input.size() != 2 * model.dimension ||
        trace.act2.size() != model.hidden2 || trace.act1.size() != model.hidden1) {
        throw InvalidArgument("backward: trace or cotangent shape does not match model");
    }
    if (!grads.same_shapes(model.params)) throw InvalidArgument("backward: gradient buffer shape mismatch");
    const Parameters& p = model.params;

    add_outer(grads.w3, logit_grads, trace.act2, scale);
    for (std::size_t i = 0; i < model.dimension; ++i) grads.b3[i] += scale * logit_grads[i];

    std::vector<double> g2(model.hidden2);
    matvec_transposed(p.w3, logit_grads, g2);
    for (std::size_t j = 0; j < model.hidden2; ++j) g2[j] *= activate_grad(model.activation, trace.pre2[j], trace.act2[j]);
    add_outer(grads.w2, g2, trace.act1, scale);
    for (std::size_t j = 0; j < model.hidden2; ++j) grads.b2[j] += scale * g2[j];

    std::vector<double> g1(model.hidden1);
    matvec_transposed(p.w2, g2, g1);
    for (std::size_t j = 0; j < model.hidden1; ++j) g1[j] *= activate_grad(model.activation, trace.pre1[j], trace.act1[j]);
    add_outer(grads.w1, g1, trace.input, scale);
    for (std::size_t j = 0; j < model.hidden1; ++j) grads.b1[j] += scale * g1[j];
}

Parameters backward(const NadeModel& model, const ForwardTrace& trace, const Matrix& logit_grads) {
    if (logit_grads.rows() != model.dimension || logit_grads.cols() != 1) {
        throw InvalidArgument("backward: logit_grads must be D x 1");
    }
    Parameters grads = model.params.zeros_like();
    accumulate_backward(model, trace, logit_grads.values(), grads);
    return grads;
}

void write_checkpoint(const NadeModel& model, std::ostream& out) {
    out << kCheckpointMagic << " v" << kCheckpointVersion << '\n';
    out << "dimension " << model.dimension << '\n';
    out << "hidden " << model.hidden1 << ' ' << model.hidden2 << '\n';
    out << "seed " << model.seed << '\n';
    out << "activation " << to_string(model.activation) << '\n';
    auto tensors = model.params.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        const Matrix& m = *tensors[t];
        out << Parameters::names[t] << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_double(m(r, c));
            out << '\n';
        }
    }
}

NadeModel read_checkpoint(std::istream& in, const std::string& source) {
    auto fail = [&](const std::string& what) -> FormatError { return FormatError(source + ": " + what); };
    std::string magic, version, key;
    in >> magic >> version;
    if (magic != kCheckpointMagic) throw fail("not a checkpoint file");
    if (version != "v" + std::to_string(kCheckpointVersion)) throw fail("unsupported checkpoint version " + version);

    NadeModel model;
    std::string activation;
    if (!(in >> key) || key != "dimension" || !(in >> model.dimension)) throw fail("missing dimension");
    if (!(in >> key) || key != "hidden" || !(in >> model.hidden1 >> model.hidden2)) throw fail("missing hidden sizes");
    if (!(in >> key) || key != "seed" || !(in >> model.seed)) throw fail("missing seed");
    if (!(in >> key) || key != "activation" || !(in >> activation)) throw fail("missing activation");
    model.activation = parse_activation(activation);
    if (model.dimension == 0 || model.hidden1 == 0 || model.hidden2 == 0) throw fail("zero dimension");

    model.params = Parameters::zeros(model.dimension, model.hidden1, model.hidden2);
    auto tensors = model.params.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        Matrix& m = *tensors[t];
        std::size_t rows = 0, cols = 0;
        if (!(in >> key >> rows >> cols) || key != Parameters::names[t]) {
            throw fail(std::string("expected tensor ") + Parameters::names[t]);
        }
        if (rows != m.rows() || cols != m.cols()) throw fail(std::string("shape mismatch for ") + Parameters::names[t]);
        std::string token;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (!(in >> token)) throw fail(std::string("truncated tensor ") + Parameters::names[t]);
            m[i] = parse_double(token, Parameters::names[t]);
        }
    }
    if (!model.params.all_finite()) throw fail("non-finite parameter");
    return model;
}

void save_checkpoint(const NadeModel& model, const std::filesystem::path& path) {
    std::ostringstream os;
    write_checkpoint(model, os);
    write_file_atomic(path, os.str());
}

NadeModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open checkpoint " + path.string());
    return read_checkpoint(in, path.string());
}

}  // namespace oanade
