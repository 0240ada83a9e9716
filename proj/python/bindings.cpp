#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "oanade/combinatorics.hpp"
#include "oanade/dataset.hpp"
#include "oanade/errors.hpp"
#include "oanade/losses.hpp"
#include "oanade/model.hpp"
#include "oanade/oracles.hpp"
#include "oanade/training.hpp"

namespace py = pybind11;
using namespace oanade;

namespace {

BitVector to_bits(const std::vector<int>& values) {
    BitVector out;
    out.reserve(values.size());
    for (int v : values) {
        if (v != 0 && v != 1) throw InvalidArgument("expected a 0/1 vector");
        out.push_back(static_cast<Bit>(v));
    }
    return out;
}

std::vector<int> from_bits(const BitVector& bits) { return {bits.begin(), bits.end()}; }

BitMatrix to_bit_matrix(const std::vector<std::vector<int>>& rows) {
    BitMatrix m;
    for (const auto& r : rows) m.append_row(to_bits(r));
    return m;
}

std::vector<std::vector<int>> from_bit_matrix(const BitMatrix& m) {
    std::vector<std::vector<int>> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Order-agnostic NADE training (OA and OA++) for binary data completion";

    py::register_exception<CapacityError>(m, "CapacityError", PyExc_ValueError);

    py::class_<ObservedSet>(m, "ObservedSet")
        .def(py::init<std::size_t, std::vector<std::size_t>>(), py::arg("dimension"), py::arg("members"))
        .def_property_readonly("dimension", &ObservedSet::dimension)
        .def_property_readonly("members", &ObservedSet::members)
        .def("complement", &ObservedSet::complement)
        .def("__len__", &ObservedSet::size)
        .def("__repr__", [](const ObservedSet& s) {
            std::string out = "ObservedSet(" + std::to_string(s.dimension()) + ", [";
            for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + std::to_string(s.members()[i]);
            return out + "])";
        });

    py::class_<Ordering>(m, "Ordering")
        .def(py::init<std::vector<std::size_t>>(), py::arg("perm"))
        .def_property_readonly("perm", &Ordering::perm);

    py::class_<OrderingSet>(m, "OrderingSet")
        .def_property_readonly("k", &OrderingSet::k)
        .def_property_readonly("orderings", [](const OrderingSet& s) {
            std::vector<std::vector<std::size_t>> out;
            for (const auto& o : s.orderings) out.push_back(o.perm());
            return out;
        })
        .def_readonly("seed", &OrderingSet::seed);

    m.def("sample_ordering_set", &sample_ordering_set, py::arg("dimension"), py::arg("k"), py::arg("seed"));
    m.def("load_ordering_set", &load_ordering_set);
    m.def("save_ordering_set", &save_ordering_set);
    m.def("count_conditionals_of_size", &count_conditionals_of_size, py::arg("dimension"), py::arg("d"));
    m.def("count_trained_conditionals_oapp", &count_trained_conditionals_oapp, py::arg("dimension"), py::arg("k"));

    py::class_<QueryDistribution>(m, "QueryDistribution")
        .def_static("parse", &QueryDistribution::parse)
        .def("__str__", &QueryDistribution::to_string);
    m.def("sample_query", [](const QueryDistribution& d, std::size_t dim, std::uint64_t seed) {
        Rng rng(seed);
        return sample_query(d, dim, rng);
    }, py::arg("dist"), py::arg("dimension"), py::arg("seed"));

    py::class_<NadeModel>(m, "NadeModel")
        .def_readonly("dimension", &NadeModel::dimension)
        .def_readonly("hidden1", &NadeModel::hidden1)
        .def_readonly("hidden2", &NadeModel::hidden2)
        .def_readonly("seed", &NadeModel::seed)
        .def("logits", [](const NadeModel& model, const std::vector<int>& x, const ObservedSet& mask) {
            const ForwardTrace t = forward(model, to_bits(x), mask);
            return std::vector<double>(t.logits.values().begin(), t.logits.values().end());
        }, py::arg("x"), py::arg("mask"))
        .def("save", [](const NadeModel& model, const std::string& path) { save_checkpoint(model, path); });

    m.def("init_model", [](std::size_t d, std::size_t h1, std::size_t h2, std::uint64_t seed) {
        return init_model(d, h1, h2, seed);
    }, py::arg("dimension"), py::arg("hidden1") = 256, py::arg("hidden2") = 256, py::arg("seed") = 0);
    m.def("load_checkpoint", [](const std::string& path) { return load_checkpoint(path); });

    m.def("oa_loss_exact", [](const NadeModel& model, const std::vector<int>& x) {
        return oa_loss_exact(model, to_bits(x)).value;
    });
    m.def("oapp_loss_exact", [](const NadeModel& model, const std::vector<int>& x, const OrderingSet& os,
                                const QueryDistribution& d) { return oapp_loss_exact(model, to_bits(x), os, d).value; });
    m.def("oa_loss_estimate", [](const NadeModel& model, const std::vector<int>& x, std::uint64_t seed) {
        Rng rng(seed);
        return oa_loss_estimate(model, to_bits(x), rng).loss.value;
    });
    m.def("oapp_loss_estimate", [](const NadeModel& model, const std::vector<int>& x, const OrderingSet& os,
                                   const QueryDistribution& d, std::uint64_t seed) {
        Rng rng(seed);
        return oapp_loss_estimate(model, to_bits(x), os, d, rng).loss.value;
    });
    m.def("completion_nll", [](const NadeModel& model, const std::vector<int>& x, const ObservedSet& obs,
                               const OrderingSet& os) { return completion_nll(model, to_bits(x), obs, os); });
    m.def("impute", [](const NadeModel& model, const std::vector<int>& x, const ObservedSet& obs, const Ordering& o,
                       std::uint64_t seed) {
        Rng rng(seed);
        return from_bits(impute(model, to_bits(x), obs, o, rng));
    });

    py::class_<BinaryDataset>(m, "BinaryDataset")
        .def_readonly("name", &BinaryDataset::name)
        .def_readonly("dimension", &BinaryDataset::dimension)
        .def_property_readonly("train", [](const BinaryDataset& d) { return from_bit_matrix(d.train); })
        .def_property_readonly("valid", [](const BinaryDataset& d) { return from_bit_matrix(d.valid); })
        .def_property_readonly("test", [](const BinaryDataset& d) { return from_bit_matrix(d.test); });
    m.def("load_dataset", [](const std::string& dir) { return load_dataset(dir); });
    m.def("make_dataset", [](const std::string& name, const std::vector<std::vector<int>>& train,
                             const std::vector<std::vector<int>>& valid, const std::vector<std::vector<int>>& test) {
        BinaryDataset d{name, 0, to_bit_matrix(train), to_bit_matrix(valid), to_bit_matrix(test)};
        d.dimension = d.train.cols();
        return d;
    }, py::arg("name"), py::arg("train"), py::arg("valid"), py::arg("test"));
    m.def("make_independent_bernoulli", [](const std::vector<double>& p, std::size_t n_train, std::size_t n_valid,
                                           std::size_t n_test, std::uint64_t seed) {
        return make_synthetic(IndependentBernoulli{p}, {n_train, n_valid, n_test}, seed).data;
    });

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_property("procedure", [](const TrainConfig& c) { return to_string(c.procedure); },
                      [](TrainConfig& c, const std::string& s) { c.procedure = parse_procedure(s); })
        .def_property("query_dist", [](const TrainConfig& c) { return c.query_dist.to_string(); },
                      [](TrainConfig& c, const std::string& s) { c.query_dist = QueryDistribution::parse(s); })
        .def_readwrite("k", &TrainConfig::k)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("budget", &TrainConfig::budget)
        .def_readwrite("eval_every", &TrainConfig::eval_every)
        .def_readwrite("valid_queries", &TrainConfig::valid_queries)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("early_stop_patience", &TrainConfig::early_stop_patience);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("orderings", &TrainResult::orderings)
        .def_readonly("best_valid_nll", &TrainResult::best_valid_nll)
        .def_property_readonly("training_inferences", [](const TrainResult& r) { return r.ledger.training_inferences; })
        .def_property_readonly("trace", [](const TrainResult& r) {
            std::vector<std::tuple<double, double, double>> rows;
            for (const auto& row : r.trace.rows) rows.emplace_back(row.computations_over_d, row.train_loss, row.valid_nll);
            return rows;
        })
        .def_property_readonly("trace_csv", [](const TrainResult& r) { return r.trace.to_csv(); });

    m.def("train", [](const NadeModel& model, const BinaryDataset& data, const TrainConfig& cfg) {
        py::gil_scoped_release release;
        return train(model, data, cfg);
    });
    m.def("evaluate", [](const NadeModel& model, const BinaryDataset& data, const QueryDistribution& dist,
                         std::size_t n_queries, std::uint64_t seed, const OrderingSet& os) {
        return evaluate(model, generate_query_set(data.test, dist, n_queries, seed), os);
    }, py::arg("model"), py::arg("data"), py::arg("dist"), py::arg("n_queries"), py::arg("seed"), py::arg("orderings"));

    m.def("oracle_check", [](std::uint64_t seed) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& c : oracles::run_oracle_suite(seed)) out.emplace_back(c.name, c.passed, c.detail);
        return out;
    }, py::arg("seed") = 1);
}
