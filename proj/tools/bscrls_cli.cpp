// Command-line front end: train, eval, increment, diagnose, bench.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error. All commands are
// deterministic given their flags and seeds (reported wall times excepted).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bscrls/bscrls.hpp"

namespace {

using namespace bscrls;

constexpr double kTwoOverPi = 0.63661977236758134308;

struct DataFlags {
    std::string path;
    std::vector<std::size_t> target_columns;
    bool no_header = false;
    std::string delimiter = ",";
};

struct SynthFlags {
    std::string kind;  // "classification" or "regression"
    std::size_t samples = 400;
    double noise = 0.2;
    std::string target = "sine-mix";
    std::uint64_t data_seed = 12345;
};

struct ArchFlags {
    std::size_t n = 10, k = 10, q = 50, m = 20;
    double gamma = 0.9;
    double lambda = 1e-8;
    std::uint64_t seed = 1;
    std::size_t retries = 8;
    std::string activation = "sigmoid";
    std::string gate = "contraction";
    bool exact_pinv = false;
    double low = -1.0, high = 1.0;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags, bool required) {
    auto* opt = cmd->add_option("--data", flags.path, "dataset CSV file");
    if (required) opt->required();
    cmd->add_option("--target-col", flags.target_columns,
                    "target column indices (default: last column)");
    cmd->add_flag("--no-header", flags.no_header, "CSV has no header row");
    cmd->add_option("--delimiter", flags.delimiter, "CSV field delimiter")->default_str(",");
}

void add_arch_flags(CLI::App* cmd, ArchFlags& flags) {
    cmd->add_option("--n", flags.n, "feature node groups");
    cmd->add_option("--k", flags.k, "nodes per feature group");
    cmd->add_option("--q", flags.q, "enhancement nodes per layer");
    cmd->add_option("--m", flags.m, "residual learning layers");
    cmd->add_option("--gamma", flags.gamma, "learning parameter in (0, 1)");
    cmd->add_option("--lambda", flags.lambda, "ridge regularization");
    cmd->add_option("--seed", flags.seed, "random parameter seed");
    cmd->add_option("--retries", flags.retries, "candidate draws per layer");
    cmd->add_option("--activation", flags.activation, "sigmoid | tanh | identity");
    cmd->add_option("--gate", flags.gate, "supervisory gate: contraction | operator_norm");
    cmd->add_flag("--exact-pinv", flags.exact_pinv, "solve layers with the pseudo-inverse");
    cmd->add_option("--low", flags.low, "random range lower bound");
    cmd->add_option("--high", flags.high, "random range upper bound");
}

CsvSchema make_schema(const DataFlags& flags, const std::string& path) {
    CsvSchema schema;
    schema.has_header = !flags.no_header;
    schema.delimiter = flags.delimiter.empty() ? ',' : flags.delimiter.front();
    if (!flags.target_columns.empty()) {
        schema.target_columns = flags.target_columns;
        return schema;
    }
    // Default target: the last column. Peek at the first line for the width.
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + " is empty");
    std::size_t cols = 1;
    for (char ch : line)
        if (ch == schema.delimiter) ++cols;
    schema.target_columns = {cols - 1};
    return schema;
}

Dataset load_flagged(const DataFlags& flags) { return load_csv(flags.path, make_schema(flags, flags.path)); }

Dataset make_synth(const SynthFlags& flags) {
    if (flags.kind == "classification")
        return synth_classification(flags.data_seed, flags.samples, flags.noise);
    if (flags.kind == "regression")
        return synth_regression(flags.data_seed, flags.samples, parse_regression_target(flags.target));
    throw std::runtime_error("unknown synthetic dataset kind: " + flags.kind);
}

ModelConfig make_config(const ArchFlags& arch, const std::string& mode) {
    ModelConfig cfg;
    cfg.n_feature_groups = arch.n;
    cfg.nodes_per_group = arch.k;
    cfg.enhancement_per_layer = arch.q;
    cfg.n_layers = arch.m;
    cfg.gamma = arch.gamma;
    cfg.lambda = arch.lambda;
    cfg.activation = parse_activation(arch.activation);
    cfg.random = RandomSpec{arch.seed, arch.low, arch.high};
    cfg.max_retries = arch.retries;
    cfg.use_exact_pinv = arch.exact_pinv;
    if (mode == "brls")
        cfg.supervisory_mode = SupervisoryMode::off;
    else if (mode == "bscrls")
        cfg.supervisory_mode = parse_supervisory_mode(arch.gate);
    else
        throw std::runtime_error("unknown training mode: " + mode);
    return cfg;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("-"); }

BinaryMetrics classification_metrics(const BroadModel& model, const Matrix& x, const Matrix& y,
                                     int positive) {
    return binary_metrics(argmax_labels(predict(model, x)), argmax_labels(y), positive);
}

void print_metrics_row(const std::string& name, const BinaryMetrics& m) {
    std::cout << name << ": accuracy=" << fmt(m.accuracy) << " precision=" << fmt_opt(m.precision)
              << " recall=" << fmt_opt(m.recall) << " f1=" << fmt_opt(m.f1)
              << " false_positive=" << fmt_opt(m.fpr) << " false_negative=" << fmt_opt(m.fnr)
              << "\n";
}

double total_wall_time(const TrainingTrace& trace) {
    double total = 0.0;
    for (const LayerRecord& r : trace.layers) total += r.wall_time_s;
    return total;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    DataFlags data;
    SynthFlags synth;
    ArchFlags arch;
    std::string mode = "bscrls";
    std::string normalize_mode = "none";
    double test_split = 0.0;
    std::uint64_t split_seed = 99;
    std::string out_path;
    std::string trace_path;
    int positive = 1;
    bool use_synth = false;
};

int run_train(const TrainArgs& args) {
    Dataset ds = args.use_synth ? make_synth(args.synth) : load_flagged(args.data);
    ds = normalize(ds, parse_normalize_mode(args.normalize_mode));

    Dataset train_part = ds;
    std::optional<Dataset> test_part;
    if (args.test_split > 0.0) {
        auto [tr, te] = split_train_test(ds, args.test_split, args.split_seed);
        train_part = std::move(tr);
        test_part = std::move(te);
    }

    ModelConfig cfg = make_config(args.arch, args.mode);
    TrainerState state = train(cfg, train_part.x, train_part.y);

    std::cout << "mode=" << args.mode << " layers=" << state.model.layers.size()
              << " final_train_residual=" << fmt(frobenius_norm(state.residual)) << "\n";
    if (test_part && !ds.label_names.empty()) {
        print_metrics_row("test", classification_metrics(state.model, test_part->x, test_part->y,
                                                         args.positive));
    } else if (test_part) {
        std::cout << "test_error="
                  << fmt(testing_error(state.model, test_part->x, test_part->y,
                                       state.model.layers.size()))
                  << "\n";
    }

    ModelArchive archive{1, state.model, state.trace, ds.normalization, state.rng.cursor()};
    save_model(archive, args.out_path);
    std::cout << "model written to " << args.out_path << "\n";
    if (!args.trace_path.empty()) {
        save_trace_csv(state.trace, args.trace_path);
        std::cout << "trace written to " << args.trace_path << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string model_path;
    DataFlags data;
    std::string curve_path;
    std::string out_path;
    int positive = 1;
};

int run_eval(const EvalArgs& args) {
    ModelArchive archive = load_model(args.model_path);
    Dataset ds = load_flagged(args.data);
    Matrix x = apply_normalization(archive.normalization, ds.x);

    const bool classification = !ds.label_names.empty();
    if (classification) {
        BinaryMetrics m = binary_metrics(argmax_labels(predict(archive.model, x)),
                                         argmax_labels(ds.y), args.positive);
        print_metrics_row("eval", m);
        if (!args.out_path.empty()) {
            std::ofstream out(args.out_path);
            out << "accuracy,precision,recall,f1,false_positive,false_negative\n";
            out << fmt(m.accuracy) << "," << fmt_opt(m.precision) << "," << fmt_opt(m.recall)
                << "," << fmt_opt(m.f1) << "," << fmt_opt(m.fpr) << "," << fmt_opt(m.fnr) << "\n";
        }
    } else {
        const double err = testing_error(archive.model, x, ds.y, archive.model.layers.size());
        std::cout << "eval: error=" << fmt(err) << "\n";
        if (!args.out_path.empty()) {
            std::ofstream out(args.out_path);
            out << "error\n" << fmt(err) << "\n";
        }
    }

    if (!args.curve_path.empty()) {
        std::ofstream out(args.curve_path);
        if (!out) throw std::runtime_error("cannot open " + args.curve_path);
        out << (classification ? "depth,training_error,testing_error,testing_accuracy\n"
                               : "depth,training_error,testing_error\n");
        const std::size_t depth = archive.model.layers.size();
        for (std::size_t t = 0; t <= depth; ++t) {
            out << t << "," << fmt(training_error(archive.trace, t)) << ","
                << fmt(testing_error(archive.model, x, ds.y, t));
            if (classification) {
                const Matrix scores = predict_truncated(archive.model, x, t);
                const BinaryMetrics m =
                    binary_metrics(argmax_labels(scores), argmax_labels(ds.y), args.positive);
                out << "," << fmt(m.accuracy);
            }
            out << "\n";
        }
        std::cout << "curve written to " << args.curve_path << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// increment

struct IncrementArgs {
    std::string kind;  // enh | feat | data
    std::string model_path;
    DataFlags data;      // original training data
    DataFlags new_data;  // appended rows (kind == data)
    DataFlags test_data; // optional, for the accuracy column
    std::string out_path;
    std::string table_path;
    std::string merged_path;
    double gamma = 0.0;  // 0 -> use the model's gamma
    std::size_t count = 1;
    bool no_gate = false;
    int positive = 1;
};

std::size_t total_enhancement_nodes(const BroadModel& model) {
    std::size_t total = 0;
    for (const ResidualLayer& layer : model.layers) total += layer.enhancement.w_h.cols();
    return total;
}

std::size_t total_feature_nodes(const BroadModel& model) {
    std::size_t total = 0;
    for (const FeatureGroup& g : model.feature_groups) total += g.w_e.cols();
    return total;
}

void append_table_row(const std::string& path, const std::string& kind, std::size_t f_before,
                      std::size_t f_after, std::size_t e_before, std::size_t e_after,
                      std::size_t rows_before, std::size_t rows_after, double accuracy,
                      double additional_s, double accumulative_s) {
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + path);
    if (fresh)
        out << "kind,feature_nodes_before,feature_nodes_after,enhancement_nodes_before,"
               "enhancement_nodes_after,rows_before,rows_after,accuracy,additional_time_s,"
               "accumulative_time_s\n";
    out << kind << "," << f_before << "," << f_after << "," << e_before << "," << e_after << ","
        << rows_before << "," << rows_after << "," << fmt(accuracy) << "," << fmt(additional_s)
        << "," << fmt(accumulative_s) << "\n";
}

int run_increment(const IncrementArgs& args) {
    ModelArchive archive = load_model(args.model_path);
    Dataset ds = load_flagged(args.data);
    Matrix x = apply_normalization(archive.normalization, ds.x);

    TrainerState state =
        rebuild_state(std::move(archive.model), std::move(archive.trace), x, ds.y,
                      archive.rng_cursor);
    const double gamma = args.gamma > 0.0 ? args.gamma : state.model.config.gamma;

    const std::size_t f_before = total_feature_nodes(state.model);
    const std::size_t e_before = total_enhancement_nodes(state.model);
    const std::size_t rows_before = state.x_total.rows();

    double additional = 0.0;
    if (args.kind == "enh") {
        for (std::size_t i = 0; i < args.count; ++i)
            additional += add_enhancement_layer(state, gamma).record.wall_time_s;
    } else if (args.kind == "feat") {
        for (std::size_t i = 0; i < args.count; ++i)
            additional += add_feature_group(state, gamma).record.wall_time_s;
    } else if (args.kind == "data") {
        Dataset extra = load_flagged(args.new_data);
        Matrix xa = apply_normalization(archive.normalization, extra.x);
        additional += add_input_data(state, xa, extra.y, gamma, !args.no_gate).record.wall_time_s;
        if (!args.merged_path.empty()) {
            Dataset merged = ds;
            merged.x = concat_rows({ds.x, extra.x});
            merged.y = concat_rows({ds.y, extra.y});
            save_csv(merged, args.merged_path);
            std::cout << "merged dataset written to " << args.merged_path << "\n";
        }
    } else {
        throw std::runtime_error("unknown increment kind: " + args.kind);
    }

    std::cout << "kind=" << args.kind << " layers=" << state.model.layers.size()
              << " residual=" << fmt(frobenius_norm(state.residual)) << "\n";

    double accuracy = 0.0;
    if (!args.test_data.path.empty() && !ds.label_names.empty()) {
        Dataset test = load_flagged(args.test_data);
        Matrix xt = apply_normalization(archive.normalization, test.x);
        accuracy = binary_metrics(argmax_labels(predict(state.model, xt)), argmax_labels(test.y),
                                  args.positive)
                       .accuracy;
    } else if (!ds.label_names.empty()) {
        accuracy = binary_metrics(argmax_labels(predict(state.model, state.x_total)),
                                  argmax_labels(state.y_total), args.positive)
                       .accuracy;
    }

    if (!args.table_path.empty()) {
        append_table_row(args.table_path, args.kind, f_before, total_feature_nodes(state.model),
                         e_before, total_enhancement_nodes(state.model), rows_before,
                         state.x_total.rows(), accuracy, additional,
                         total_wall_time(state.trace));
        std::cout << "table row appended to " << args.table_path << "\n";
    }

    ModelArchive updated{1, state.model, state.trace, archive.normalization, state.rng.cursor()};
    save_model(updated, args.out_path);
    std::cout << "model written to " << args.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
    std::string trace_path;
    double tolerance = 1e-3;
    std::size_t horizon = 20;
    std::size_t wallis = 0;
    std::string out_path;
};

int run_diagnose(const DiagnoseArgs& args) {
    if (args.wallis > 0) {
        StagnationProduct p = stagnation_product(wallis_epsilons(args.wallis));
        std::cout << "partial_product(" << args.wallis << ")=" << detail::format_full(p.value)
                  << " gap_to_2_over_pi=" << detail::format_full(std::abs(p.value - kTwoOverPi))
                  << "\n";
        if (args.trace_path.empty()) return 0;
    }
    if (args.trace_path.empty()) throw std::runtime_error("diagnose: --trace or --wallis required");

    TrainingTrace trace = load_trace_csv(args.trace_path);
    ConvergenceReport report = classify_regime(trace, args.tolerance, args.horizon);
    std::cout << "layers=" << trace.layers.size()
              << " final_relative_residual=" << fmt(report.final_relative_residual)
              << " product_lower_bound=" << fmt(report.product_lower_bound)
              << (report.product_underflowed ? " (underflowed)" : "")
              << " regime=" << regime_name(report.regime) << "\n";
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        out << "layer,epsilon\n";
        for (std::size_t i = 0; i < report.epsilons.size(); ++i)
            out << (i + 1) << "," << detail::format_full(report.epsilons[i]) << "\n";
        std::cout << "epsilon sequence written to " << args.out_path << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    SynthFlags synth;
    ArchFlags arch;
    std::vector<std::uint64_t> seeds;
    std::string modes = "both";  // brls | bscrls | both
    bool with_scn = false;
    double test_split = 0.3;
    std::string out_path;
    int positive = 1;
};

struct Aggregate {
    std::vector<double> values;

    void add(double v) { values.push_back(v); }
    double mean() const {
        return std::accumulate(values.begin(), values.end(), 0.0) /
               static_cast<double>(values.size());
    }
    double stddev() const {
        const double mu = mean();
        double sum = 0.0;
        for (double v : values) sum += (v - mu) * (v - mu);
        return std::sqrt(sum / static_cast<double>(values.size()));
    }
};

int run_bench(const BenchArgs& args) {
    if (args.seeds.empty()) throw std::runtime_error("bench: at least one seed required");
    std::vector<std::string> modes;
    if (args.modes == "both") modes = {"brls", "bscrls"};
    else modes = {args.modes};

    const bool classification = args.synth.kind == "classification";
    std::ofstream out;
    if (!args.out_path.empty()) {
        out.open(args.out_path);
        if (!out) throw std::runtime_error("cannot open " + args.out_path);
    }
    const std::string header =
        classification
            ? "algorithm,seeds,accuracy_mean,accuracy_std,precision_mean,precision_std,"
              "recall_mean,recall_std,f1_mean,f1_std,false_positive_mean,false_positive_std,"
              "false_negative_mean,false_negative_std,train_residual_mean,train_residual_std,"
              "train_time_mean,train_time_std"
            : "algorithm,seeds,train_residual_mean,train_residual_std,test_error_mean,"
              "test_error_std,train_time_mean,train_time_std";
    std::cout << header << "\n";
    if (out.is_open()) out << header << "\n";

    auto emit = [&](const std::string& name, const std::vector<Aggregate>& stats,
                    std::size_t seeds) {
        std::string row = name + "," + std::to_string(seeds);
        for (const Aggregate& a : stats) row += "," + fmt(a.mean()) + "," + fmt(a.stddev());
        std::cout << row << "\n";
        if (out.is_open()) out << row << "\n";
    };

    for (const std::string& mode : modes) {
        std::vector<Aggregate> stats(classification ? 8 : 3);
        for (std::uint64_t seed : args.seeds) {
            SynthFlags synth = args.synth;
            synth.data_seed = seed;
            Dataset ds = make_synth(synth);
            auto [train_part, test_part] = split_train_test(ds, args.test_split, seed);

            ArchFlags arch = args.arch;
            arch.seed = seed;
            ModelConfig cfg = make_config(arch, mode);

            const auto t0 = std::chrono::steady_clock::now();
            TrainerState state = train(cfg, train_part.x, train_part.y);
            const double seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            if (classification) {
                BinaryMetrics m = classification_metrics(state.model, test_part.x, test_part.y,
                                                         args.positive);
                stats[0].add(m.accuracy);
                stats[1].add(m.precision.value_or(0.0));
                stats[2].add(m.recall.value_or(0.0));
                stats[3].add(m.f1.value_or(0.0));
                stats[4].add(m.fpr.value_or(0.0));
                stats[5].add(m.fnr.value_or(0.0));
                stats[6].add(frobenius_norm(state.residual));
                stats[7].add(seconds);
            } else {
                stats[0].add(frobenius_norm(state.residual));
                stats[1].add(testing_error(state.model, test_part.x, test_part.y,
                                           state.model.layers.size()));
                stats[2].add(seconds);
            }
        }
        emit(mode, stats, args.seeds.size());
    }

    if (args.with_scn) {
        std::vector<Aggregate> stats(classification ? 8 : 3);
        for (std::uint64_t seed : args.seeds) {
            SynthFlags synth = args.synth;
            synth.data_seed = seed;
            Dataset ds = make_synth(synth);
            auto [train_part, test_part] = split_train_test(ds, args.test_split, seed);

            const auto t0 = std::chrono::steady_clock::now();
            auto [scn_state, scn_trace] =
                scn_train(train_part.y, train_part.x, args.arch.gamma, scn_default_basis_bound(),
                          args.arch.m * args.arch.q, args.arch.retries * 8,
                          RandomSpec{seed, -1.0, 1.0});
            const double seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const double train_residual = frobenius_norm(scn_state.residual_samples);

            if (classification) {
                BinaryMetrics m = binary_metrics(argmax_labels(scn_predict(scn_state, test_part.x)),
                                                 argmax_labels(test_part.y), args.positive);
                stats[0].add(m.accuracy);
                stats[1].add(m.precision.value_or(0.0));
                stats[2].add(m.recall.value_or(0.0));
                stats[3].add(m.f1.value_or(0.0));
                stats[4].add(m.fpr.value_or(0.0));
                stats[5].add(m.fnr.value_or(0.0));
                stats[6].add(train_residual);
                stats[7].add(seconds);
            } else {
                stats[0].add(train_residual);
                stats[1].add(frobenius_norm(test_part.y - scn_predict(scn_state, test_part.x)));
                stats[2].add(seconds);
            }
        }
        emit("scn", stats, args.seeds.size());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Broad residual learning with a supervisory acceptance gate"};
    app.require_subcommand(1);
    // Flat key=value configuration file; keys are dotted with the subcommand
    // name (train.n=4). Command-line flags take precedence, unknown keys are
    // errors.
    app.set_config("--config", "", "flat key=value configuration file (keys like train.n=4)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    const auto attach_config = [](CLI::App* cmd) { cmd->fallthrough(); };

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a model and write an archive");
    attach_config(train_cmd);
    {
        auto* source = train_cmd->add_option_group("source", "dataset source");
        auto* data_opt = source->add_option("--data", train_args.data.path, "dataset CSV file");
        auto* synth_opt =
            source->add_option("--synth", train_args.synth.kind, "synthetic dataset: classification | regression");
        source->require_option(1);
        data_opt->excludes(synth_opt);
        train_cmd->add_option("--target-col", train_args.data.target_columns,
                              "target column indices (default: last column)");
        train_cmd->add_flag("--no-header", train_args.data.no_header, "CSV has no header row");
        train_cmd->add_option("--delimiter", train_args.data.delimiter, "CSV field delimiter");
        train_cmd->add_option("--samples", train_args.synth.samples, "synthetic sample count");
        train_cmd->add_option("--noise", train_args.synth.noise, "synthetic noise level");
        train_cmd->add_option("--target", train_args.synth.target,
                              "synthetic regression target: sine-mix | bump-mix | constant");
        train_cmd->add_option("--data-seed", train_args.synth.data_seed, "synthetic dataset seed");
        add_arch_flags(train_cmd, train_args.arch);
        train_cmd->add_option("--mode", train_args.mode, "brls | bscrls");
        train_cmd->add_option("--normalize", train_args.normalize_mode, "none | minmax | zscore");
        train_cmd->add_option("--test-split", train_args.test_split, "held-out fraction");
        train_cmd->add_option("--split-seed", train_args.split_seed, "split shuffle seed");
        train_cmd->add_option("--out", train_args.out_path, "output model archive")->required();
        train_cmd->add_option("--trace", train_args.trace_path, "output trace CSV");
        train_cmd->add_option("--positive", train_args.positive, "positive class column index");
    }

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model archive on a dataset");
    attach_config(eval_cmd);
    {
        eval_cmd->add_option("--model", eval_args.model_path, "model archive")->required();
        add_data_flags(eval_cmd, eval_args.data, true);
        eval_cmd->add_option("--curve", eval_args.curve_path, "write per-depth error curve CSV");
        eval_cmd->add_option("--out", eval_args.out_path, "write metrics CSV");
        eval_cmd->add_option("--positive", eval_args.positive, "positive class column index");
    }

    IncrementArgs inc_args;
    auto* inc_cmd = app.add_subcommand("increment", "grow a trained model");
    attach_config(inc_cmd);
    inc_cmd->fallthrough();
    {
        inc_cmd->add_option("--model", inc_args.model_path, "model archive")->required();
        add_data_flags(inc_cmd, inc_args.data, true);
        inc_cmd->add_option("--out", inc_args.out_path, "output model archive")->required();
        inc_cmd->add_option("--table", inc_args.table_path, "experiment table CSV to append to");
        inc_cmd->add_option("--gamma", inc_args.gamma, "gate parameter (default: model's gamma)");
        inc_cmd->add_option("--count", inc_args.count, "number of increments to apply");
        inc_cmd->add_option("--test-data", inc_args.test_data.path,
                            "dataset for the accuracy column");
        inc_cmd->add_option("--positive", inc_args.positive, "positive class column index");
        inc_cmd->add_subcommand("enh", "append enhancement layers");
        inc_cmd->add_subcommand("feat", "append feature groups");
        auto* data_cmd = inc_cmd->add_subcommand("data", "append training rows");
        data_cmd->add_option("--new-data", inc_args.new_data.path, "CSV with the new rows")
            ->required();
        inc_cmd->add_option("--merged-data", inc_args.merged_path,
                            "write the combined dataset CSV (data increments)");
        inc_cmd->add_flag("--no-gate", inc_args.no_gate,
                          "skip the supervisory gate on data increments");
        inc_cmd->require_subcommand(1);
    }

    DiagnoseArgs diag_args;
    auto* diag_cmd = app.add_subcommand("diagnose", "convergence diagnostics for a trace");
    attach_config(diag_cmd);
    {
        diag_cmd->add_option("--trace", diag_args.trace_path, "trace CSV from training");
        diag_cmd->add_option("--tolerance", diag_args.tolerance, "convergent threshold");
        diag_cmd->add_option("--horizon", diag_args.horizon, "tail length for the stagnation test");
        diag_cmd->add_option("--wallis", diag_args.wallis,
                             "print the m-term stagnation product of the 1/(4j^2) sequence");
        diag_cmd->add_option("--out", diag_args.out_path, "write epsilon sequence CSV");
    }

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "multi-seed comparison runs");
    attach_config(bench_cmd);
    {
        bench_cmd->add_option("--synth", bench_args.synth.kind,
                              "synthetic dataset: classification | regression")
            ->required();
        bench_cmd->add_option("--samples", bench_args.synth.samples, "sample count");
        bench_cmd->add_option("--noise", bench_args.synth.noise, "noise level");
        bench_cmd->add_option("--target", bench_args.synth.target, "regression target");
        bench_cmd->add_option("--seeds", bench_args.seeds, "seed list")
            ->required()
            ->delimiter(',');
        bench_cmd->add_option("--modes", bench_args.modes, "brls | bscrls | both");
        bench_cmd->add_flag("--with-scn", bench_args.with_scn, "include the constructive baseline");
        bench_cmd->add_option("--test-split", bench_args.test_split, "held-out fraction");
        bench_cmd->add_option("--out", bench_args.out_path, "write the result table CSV");
        bench_cmd->add_option("--positive", bench_args.positive, "positive class column index");
        add_arch_flags(bench_cmd, bench_args.arch);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (train_cmd->parsed()) {
            train_args.use_synth = !train_args.synth.kind.empty();
            return run_train(train_args);
        }
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (inc_cmd->parsed()) {
            for (const auto* sub : inc_cmd->get_subcommands())
                inc_args.kind = sub->get_name();
            return run_increment(inc_args);
        }
        if (diag_cmd->parsed()) return run_diagnose(diag_args);
        if (bench_cmd->parsed()) return run_bench(bench_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
