#include "oanade/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "oanade/dataset.hpp"
#include "oanade/errors.hpp"
#include "oanade/fetch.hpp"
#include "oanade/io_util.hpp"
#include "oanade/model.hpp"
#include "oanade/oracles.hpp"
#include "oanade/training.hpp"

namespace oanade {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Values from the config file fill options the command line left unset.
void apply_config(CLI::App& sub, const std::string& path) {
    if (path.empty()) return;
    for (const auto& [key, value] : parse_config_file(path)) {
        CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (opt == nullptr) throw InvalidArgument("config " + path + ": unknown key '" + key + "'");
        if (opt->count() == 0) {
            opt->add_result(value);
            opt->run_callback();
        }
    }
}

std::uint64_t as_count(double value, const char* what) {
    if (!(value >= 0.0) || value != std::floor(value) || value > 1e18) {
        throw InvalidArgument(std::string(what) + " must be a non-negative integer");
    }
    return static_cast<std::uint64_t>(value);
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

struct TrainArgs {
    std::string config, data, out;
    std::string procedure = "oapp";
    std::string query_dist = "uniform";
    std::string optimizer = "adam";
    std::string activation = "relu";
    std::size_t k = 1;
    std::size_t batch = 16;
    std::size_t hidden1 = 256;
    std::size_t hidden2 = 256;
    std::size_t valid_queries = 1000;
    std::size_t patience = 20;
    double lr = 1e-3;
    double budget = 2e5;
    double eval_every = 1e4;
    std::uint64_t seed = 0;
};

int cmd_train(CLI::App& sub, const TrainArgs& a, std::ostream& out) {
    apply_config(sub, a.config);
    if (a.data.empty()) throw InvalidArgument("train: --data is required");
    if (a.out.empty()) throw InvalidArgument("train: --out is required");

    const BinaryDataset data = load_dataset(a.data);
    TrainConfig cfg;
    cfg.procedure = parse_procedure(a.procedure);
    cfg.k = a.k;
    cfg.query_dist = QueryDistribution::parse(a.query_dist);
    cfg.batch_size = a.batch;
    cfg.learning_rate = a.lr;
    cfg.optimizer = parse_optimizer(a.optimizer);
    cfg.budget = as_count(a.budget, "budget");
    cfg.eval_every = as_count(a.eval_every, "eval-every");
    cfg.valid_queries = a.valid_queries;
    cfg.seed = a.seed;
    cfg.early_stop_patience = a.patience;

    const NadeModel init = init_model(data.dimension, a.hidden1, a.hidden2, a.seed, parse_activation(a.activation));
    const TrainResult r = train(init, data, cfg);

    const std::filesystem::path dir(a.out);
    std::filesystem::create_directories(dir);
    save_checkpoint(r.model, dir / "checkpoint.txt");
    r.trace.save_csv(dir / "trace.csv");
    save_ordering_set(r.orderings, dir / "orderings.txt");
    save_query_set(r.valid_queries, dir / "valid_queries.txt");

    out << "trained " << to_string(cfg.procedure) << " on " << data.name << " (D=" << data.dimension << "): "
        << r.ledger.training_inferences << " training inferences, " << r.ledger.evaluation_inferences
        << " evaluation inferences, best valid NLL " << fixed(r.best_valid_nll, 4) << (r.stopped_early ? " (early stop)" : "")
        << '\n';
    return 0;
}

struct EvalArgs {
    std::string config, data;
    std::vector<std::string> runs;
    std::vector<std::string> query_sets;
    std::vector<std::string> query_files;
    std::string split = "test";
    std::string format = "text";
    std::string save_queries;
    std::size_t n_queries = 1000;
    std::uint64_t seed = 0;
};

int cmd_eval(CLI::App& sub, EvalArgs a, std::ostream& out) {
    apply_config(sub, a.config);
    if (a.data.empty()) throw InvalidArgument("eval: --data is required");
    if (a.runs.empty()) throw InvalidArgument("eval: at least one --run is required");
    if (a.format != "text" && a.format != "csv") throw InvalidArgument("eval: --format must be text or csv");

    const BinaryDataset data = load_dataset(a.data);
    const BitMatrix& split = data.split(parse_split(a.split));

    std::vector<QuerySet> sets;
    std::vector<std::string> labels;
    for (const std::string& file : a.query_files) {
        sets.push_back(load_query_set(file, split));
        labels.push_back(sets.back().distribution.to_string());
    }
    if (a.query_files.empty()) {
        if (a.query_sets.empty()) a.query_sets = {"uniform", "fixed-size:half"};
        for (std::size_t i = 0; i < a.query_sets.size(); ++i) {
            sets.push_back(generate_query_set(split, QueryDistribution::parse(a.query_sets[i]), a.n_queries,
                                              derive_seed(a.seed, 100 + i)));
            labels.push_back(a.query_sets[i]);
        }
    }
    if (!a.save_queries.empty()) {
        std::filesystem::create_directories(a.save_queries);
        for (std::size_t i = 0; i < sets.size(); ++i) {
            save_query_set(sets[i], std::filesystem::path(a.save_queries) / ("queries_" + std::to_string(i) + ".txt"));
        }
    }

    if (a.format == "csv") {
        out << "model";
        for (const auto& l : labels) out << ',' << l;
        out << '\n';
    } else {
        out << "# mean completion NLL (nats) on " << data.name << '/' << a.split << ": ";
        for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? " / " : "") << labels[i];
        out << '\n';
    }
    for (const std::string& run : a.runs) {
        const std::filesystem::path dir(run);
        const NadeModel model = load_checkpoint(dir / "checkpoint.txt");
        const OrderingSet orderings = load_ordering_set(dir / "orderings.txt");
        if (model.dimension != data.dimension) throw InvalidArgument("eval: " + run + " was trained on a different D");
        std::string name = dir.filename().string();
        if (name.empty()) name = dir.parent_path().filename().string();
        if (a.format == "csv") {
            out << name;
            for (const auto& s : sets) out << ',' << format_double(evaluate(model, s, orderings));
            out << '\n';
        } else {
            out << std::left << std::setw(24) << name;
            for (std::size_t i = 0; i < sets.size(); ++i) out << (i ? " / " : "") << fixed(evaluate(model, sets[i], orderings), 2);
            out << '\n';
        }
    }
    return 0;
}

int cmd_oracle_check(std::uint64_t seed, std::ostream& out) {
    bool ok = true;
    for (const auto& c : oracles::run_oracle_suite(seed)) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << " [" << c.detail << "]\n";
        ok = ok && c.passed;
    }
    out << (ok ? "all oracle checks passed\n" : "oracle checks FAILED\n");
    return ok ? 0 : 1;
}

int cmd_export_metrics(const std::vector<std::string>& inputs, const std::string& output, std::ostream& out) {
    if (inputs.empty()) throw InvalidArgument("export-metrics: at least one --input is required");
    std::string csv = std::string("run,") + MetricTrace::csv_header + '\n';
    for (const std::string& item : inputs) {
        std::string label, path = item;
        if (const auto eq = item.find('='); eq != std::string::npos) {
            label = item.substr(0, eq);
            path = item.substr(eq + 1);
        }
        std::filesystem::path p(path);
        if (std::filesystem::is_directory(p)) p /= "trace.csv";
        if (label.empty()) label = p.parent_path().filename().string();
        for (const MetricRow& r : MetricTrace::load_csv(p).rows) {
            csv += label + ',' + format_double(r.computations_over_d) + ',' + format_double(r.train_loss) + ',' +
                   format_double(r.valid_nll) + '\n';
        }
    }
    if (output.empty() || output == "-") {
        out << csv;
    } else {
        write_file_atomic(output, csv);
    }
    return 0;
}

struct SynthArgs {
    std::string out;
    std::size_t dimension = 10;
    std::size_t components = 1;
    std::size_t n_train = 5000, n_valid = 1000, n_test = 1000;
    std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    if (a.out.empty()) throw InvalidArgument("synth: --out is required");
    if (a.dimension == 0 || a.components == 0) throw InvalidArgument("synth: dimension and components must be positive");
    Rng rng(derive_seed(a.seed, 7));
    auto draw_p = [&] {
        std::vector<double> p(a.dimension);
        for (double& v : p) v = 0.1 + 0.8 * uniform_unit(rng);
        return p;
    };
    SyntheticKind kind;
    if (a.components == 1) {
        kind = IndependentBernoulli{draw_p()};
    } else {
        MixtureOfProducts mix;
        double total = 0.0;
        for (std::size_t c = 0; c < a.components; ++c) {
            mix.weights.push_back(0.5 + uniform_unit(rng));
            total += mix.weights.back();
            mix.p.push_back(draw_p());
        }
        for (double& w : mix.weights) w /= total;
        kind = mix;
    }
    const auto ds = make_synthetic(kind, {a.n_train, a.n_valid, a.n_test}, a.seed,
                                   std::filesystem::path(a.out).filename().string());
    save_dataset(ds.data, a.out);
    out << "wrote " << a.out << " (D=" << a.dimension << ", " << a.n_train << "/" << a.n_valid << "/" << a.n_test << ")\n";
    return 0;
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config file " + path.string());
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(path.string(), line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(path.string(), line_no, "empty key");
        values[key] = value;
    }
    return values;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Order-agnostic autoregressive density estimation for binary data completion"};
    app.require_subcommand(1);

    TrainArgs ta;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a model with the OA or OA++ procedure");
    train_cmd->add_option("--config", ta.config, "Flat key = value file; flags override it");
    train_cmd->add_option("--data", ta.data, "Dataset directory with train/valid/test.txt");
    train_cmd->add_option("--out", ta.out, "Output directory");
    train_cmd->add_option("--procedure", ta.procedure, "oa | oapp");
    train_cmd->add_option("--k", ta.k, "Number of fixed orderings");
    train_cmd->add_option("--query-dist", ta.query_dist, "uniform | uniform-subset | empty | fixed-size:<s|half> | fixed-set:<i,j>/<D>");
    train_cmd->add_option("--budget", ta.budget, "Training inferences");
    train_cmd->add_option("--batch", ta.batch);
    train_cmd->add_option("--lr", ta.lr);
    train_cmd->add_option("--optimizer", ta.optimizer, "adam | sgd");
    train_cmd->add_option("--hidden1", ta.hidden1);
    train_cmd->add_option("--hidden2", ta.hidden2);
    train_cmd->add_option("--activation", ta.activation, "relu | sigmoid");
    train_cmd->add_option("--eval-every", ta.eval_every, "Training inferences between validations");
    train_cmd->add_option("--valid-queries", ta.valid_queries);
    train_cmd->add_option("--patience", ta.patience, "Validations without improvement before stopping; 0 disables");
    train_cmd->add_option("--seed", ta.seed);

    EvalArgs ea;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Mean completion NLL of trained runs on query sets");
    eval_cmd->add_option("--config", ea.config);
    eval_cmd->add_option("--data", ea.data, "Dataset directory");
    eval_cmd->add_option("--run", ea.runs, "Training output directory (repeatable)");
    eval_cmd->add_option("--query-set", ea.query_sets, "Query distribution (repeatable); default uniform and fixed-size:half");
    eval_cmd->add_option("--queries", ea.query_files, "Frozen query-set file (repeatable); overrides --query-set");
    eval_cmd->add_option("--split", ea.split, "train | valid | test");
    eval_cmd->add_option("--n-queries", ea.n_queries);
    eval_cmd->add_option("--format", ea.format, "text | csv");
    eval_cmd->add_option("--save-queries", ea.save_queries, "Directory to store the generated query sets");
    eval_cmd->add_option("--seed", ea.seed);

    std::uint64_t oracle_seed = 1;
    CLI::App* oracle_cmd = app.add_subcommand("oracle-check", "Exact unbiasedness, reduction, counting and gradient checks");
    oracle_cmd->add_option("--seed", oracle_seed);

    std::vector<std::string> inputs;
    std::string metrics_out;
    CLI::App* export_cmd = app.add_subcommand("export-metrics", "Merge trace CSVs from several runs");
    export_cmd->add_option("--input", inputs, "[label=]trace.csv or run directory (repeatable)");
    export_cmd->add_option("--output", metrics_out, "Output CSV (default stdout)");

    std::string fetch_url, fetch_dir, fetch_name, fetch_expect;
    CLI::App* fetch_cmd = app.add_subcommand("fetch", "Download a dataset's split files");
    fetch_cmd->add_option("--name", fetch_name, "Dataset name (subdirectory of --dir)")->required();
    fetch_cmd->add_option("--url", fetch_url, "Base URL holding train.txt, valid.txt, test.txt")->required();
    fetch_cmd->add_option("--dir", fetch_dir, "Parent directory")->required();
    fetch_cmd->add_option("--expect", fetch_expect, "Row counts as train,valid,test");

    SynthArgs sa;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Write a synthetic product / mixture-of-products dataset");
    synth_cmd->add_option("--out", sa.out, "Output dataset directory");
    synth_cmd->add_option("--dimension", sa.dimension);
    synth_cmd->add_option("--components", sa.components, "1 gives independent Bernoullis");
    synth_cmd->add_option("--n-train", sa.n_train);
    synth_cmd->add_option("--n-valid", sa.n_valid);
    synth_cmd->add_option("--n-test", sa.n_test);
    synth_cmd->add_option("--seed", sa.seed);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*train_cmd) return cmd_train(*train_cmd, ta, out);
        if (*eval_cmd) return cmd_eval(*eval_cmd, ea, out);
        if (*oracle_cmd) return cmd_oracle_check(oracle_seed, out);
        if (*export_cmd) return cmd_export_metrics(inputs, metrics_out, out);
        if (*synth_cmd) return cmd_synth(sa, out);
        if (*fetch_cmd) {
            FetchRequest req{fetch_url, std::filesystem::path(fetch_dir) / fetch_name, std::nullopt};
            if (!fetch_expect.empty()) {
                std::vector<std::size_t> n;
                std::stringstream ss(fetch_expect);
                std::string item;
                while (std::getline(ss, item, ',')) n.push_back(parse_size(trim(item), "--expect"));
                if (n.size() != 3) throw InvalidArgument("fetch: --expect needs three counts");
                req.expected_rows = SplitSizes{n[0], n[1], n[2]};
            }
            fetch_dataset(req);
            out << "fetched " << fetch_name << " into " << req.dir.string() << '\n';
            return 0;
        }
    } catch (const TrainingDiverged& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace oanade
