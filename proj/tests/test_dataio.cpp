#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bscrls/archive.hpp"
#include "bscrls/dataio.hpp"
#include "bscrls/incremental.hpp"
#include "bscrls/metrics.hpp"
#include "bscrls/trainer.hpp"
#include "test_support.hpp"

using namespace bscrls;
namespace ts = test_support;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "bscrls_dataio_tests") {
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

} // namespace

TEST_CASE("csv loading with string labels") {
    TempDir tmp;
    const std::string path = tmp.file("labels.csv");
    write_file(path, "a,b,label\n1.0,2.0,dusty\n3.5,4.0,clean\n5.0,6.5,dusty\n");
    Dataset ds = load_csv(path, {{2}, true, ','});
    CHECK(ds.x.rows() == 3);
    CHECK(ds.x.cols() == 2);
    CHECK(ds.y.cols() == 2);
    CHECK(ds.label_names == std::vector<std::string>{"clean", "dusty"});
    CHECK(ds.y(0, 1) == 1.0);
    CHECK(ds.y(1, 0) == 1.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(ds.y(i, 0) + ds.y(i, 1) == 1.0);
}

TEST_CASE("csv loading without header and custom delimiter") {
    TempDir tmp;
    const std::string path = tmp.file("semicolon.csv");
    write_file(path, "1.5;2.5;0.0\n-1.0;0.25;1.0\n");
    Dataset ds = load_csv(path, {{2}, false, ';'});
    CHECK(ds.x.rows() == 2);
    CHECK(ds.x(0, 0) == 1.5);
    CHECK(ds.y(1, 0) == 1.0);
    CHECK(ds.label_names.empty());
}

TEST_CASE("csv errors carry line numbers") {
    TempDir tmp;
    const std::string ragged = tmp.file("ragged.csv");
    write_file(ragged, "a,b,label\n1,2,x\n3,4\n");
    CHECK_THROWS_WITH_AS(load_csv(ragged, {{2}, true, ','}), doctest::Contains(":3"),
                         std::runtime_error);

    const std::string text = tmp.file("text.csv");
    write_file(text, "a,b,label\n1,two,x\n");
    CHECK_THROWS_WITH_AS(load_csv(text, {{2}, true, ','}), doctest::Contains("non-numeric"),
                         std::runtime_error);

    const std::string empty = tmp.file("empty.csv");
    write_file(empty, "");
    CHECK_THROWS_AS(load_csv(empty, {{0}, true, ','}), std::runtime_error);
}

TEST_CASE("dataset csv round trip is bit identical") {
    TempDir tmp;
    Dataset ds = synth_classification(5, 60, 0.3);
    const std::string path = tmp.file("roundtrip.csv");
    save_csv(ds, path);
    Dataset back = load_csv(path, {{2}, true, ','});
    CHECK(back.x == ds.x);
    CHECK(back.y == ds.y);
    CHECK(back.label_names == ds.label_names);

    Dataset reg = synth_regression(6, 40, RegressionTarget::bump_mix);
    const std::string rpath = tmp.file("roundtrip_reg.csv");
    save_csv(reg, rpath);
    Dataset rback = load_csv(rpath, {{5}, true, ','});
    CHECK(rback.x == reg.x);
    CHECK(rback.y == reg.y);
}

TEST_CASE("minmax normalization") {
    Dataset ds;
    ds.x = Matrix(2, 1, {0.0, 10.0});
    ds.y = Matrix(2, 1, {0.0, 1.0});
    Dataset out = normalize(ds, NormalizeMode::minmax_to_unit);
    CHECK(out.x(0, 0) == 0.0);
    CHECK(out.x(1, 0) == 1.0);

    // The record maps raw inputs identically.
    CHECK(ts::max_abs_diff(apply_normalization(out.normalization, ds.x), out.x) == 0.0);

    // Idempotence within 1e-12.
    Dataset twice = normalize(out, NormalizeMode::minmax_to_unit);
    CHECK(ts::max_abs_diff(twice.x, out.x) < 1e-12);
    CHECK(ts::max_abs_diff(apply_normalization(twice.normalization, ds.x), twice.x) < 1e-12);

    // Constant columns land on one half.
    Dataset flat;
    flat.x = Matrix(3, 1, {7.0, 7.0, 7.0});
    flat.y = Matrix(3, 1);
    Dataset fout = normalize(flat, NormalizeMode::minmax_to_unit);
    for (std::size_t i = 0; i < 3; ++i) CHECK(fout.x(i, 0) == 0.5);
}

TEST_CASE("zscore normalization") {
    Dataset ds;
    ds.x = Matrix(10000, 1);
    RandomStream rng({17, 0.0, 1.0});
    for (std::size_t i = 0; i < 10000; ++i) {
        const double u1 = 1.0 - rng.next_unit();
        const double u2 = rng.next_unit();
        ds.x(i, 0) = 3.0 + 2.0 * std::sqrt(-2.0 * std::log(u1)) *
                               std::cos(2.0 * 3.14159265358979323846 * u2);
    }
    ds.y = Matrix(10000, 1);
    Dataset out = normalize(ds, NormalizeMode::zscore);
    double mean = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) mean += out.x(i, 0);
    mean /= 10000.0;
    double var = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) var += (out.x(i, 0) - mean) * (out.x(i, 0) - mean);
    var /= 10000.0;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - 1.0) < 0.05);

    Dataset flat;
    flat.x = Matrix(4, 1, {2.0, 2.0, 2.0, 2.0});
    flat.y = Matrix(4, 1);
    Dataset fout = normalize(flat, NormalizeMode::zscore);
    for (std::size_t i = 0; i < 4; ++i) CHECK(fout.x(i, 0) == 0.0);
}

TEST_CASE("synthetic classification data") {
    Dataset a = synth_classification(3, 400, 0.2);
    Dataset b = synth_classification(3, 400, 0.2);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);

    std::size_t class1 = 0;
    for (std::size_t i = 0; i < 400; ++i) class1 += a.y(i, 1) == 1.0 ? 1 : 0;
    CHECK(class1 >= 180);
    CHECK(class1 <= 220);

    // Noise-free classes are linearly separable along the second coordinate.
    Dataset clean = synth_classification(4, 160, 0.0);
    for (std::size_t i = 0; i < 160; ++i) {
        if (clean.y(i, 0) == 1.0) CHECK(clean.x(i, 1) >= 0.0);
        else CHECK(clean.x(i, 1) <= -0.15);
    }

    // An interpolating single-layer model separates them perfectly.
    ModelConfig cfg;
    cfg.n_feature_groups = 2;
    cfg.nodes_per_group = 10;
    cfg.n_layers = 1;
    cfg.enhancement_per_layer = 200;
    cfg.random.seed = 2;
    cfg.supervisory_mode = SupervisoryMode::off;
    auto [model, trace] = train_brls(cfg, clean.x, clean.y);
    BinaryMetrics m = binary_metrics(argmax_labels(predict(model, clean.x)),
                                     argmax_labels(clean.y), 1);
    CHECK(m.accuracy == 1.0);

    CHECK_THROWS_AS(synth_classification(1, 3, 0.1), std::invalid_argument);
}

TEST_CASE("synthetic regression data matches its closed form") {
    Dataset ds = synth_regression(11, 50, RegressionTarget::sine_mix);
    constexpr double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < 50; ++i) {
        const double expected = std::sin(2.0 * pi * ds.x(i, 0)) +
                                0.5 * std::sin(4.0 * pi * ds.x(i, 1)) + 0.25 * ds.x(i, 2) +
                                0.1 * std::cos(2.0 * pi * ds.x(i, 3)) -
                                0.2 * ds.x(i, 4) * ds.x(i, 4);
        CHECK(std::abs(ds.y(i, 0) - expected) < 1e-12);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(ds.x(i, j) >= 0.0);
            CHECK(ds.x(i, j) < 1.0);
        }
    }

    Dataset constant = synth_regression(12, 20, RegressionTarget::constant);
    for (std::size_t i = 0; i < 20; ++i) CHECK(constant.y(i, 0) == 1.0);

    Dataset again = synth_regression(11, 50, RegressionTarget::sine_mix);
    CHECK(again.x == ds.x);
    CHECK(again.y == ds.y);
}

TEST_CASE("train test split") {
    Dataset ds = synth_classification(21, 100, 0.2);
    auto [train_part, test_part] = split_train_test(ds, 0.3, 7);
    CHECK(train_part.x.rows() == 70);
    CHECK(test_part.x.rows() == 30);
    auto [train2, test2] = split_train_test(ds, 0.3, 7);
    CHECK(train_part.x == train2.x);
    CHECK(test_part.x == test2.x);
    CHECK_THROWS_AS(split_train_test(ds, 1.5, 7), std::invalid_argument);
}

TEST_CASE("model archive round trip") {
    TempDir tmp;
    Dataset ds = synth_classification(31, 80, 0.2);
    Dataset norm = normalize(ds, NormalizeMode::minmax_to_unit);

    ModelConfig cfg;
    cfg.n_feature_groups = 2;
    cfg.nodes_per_group = 4;
    cfg.n_layers = 3;
    cfg.enhancement_per_layer = 6;
    cfg.gamma = 0.9;
    cfg.random.seed = 19;
    cfg.supervisory_mode = SupervisoryMode::contraction;
    TrainerState state = train(cfg, norm.x, norm.y);
    add_feature_group(state, cfg.gamma);  // exercise the widened-layer structure

    const std::string path = tmp.file("model.bin");
    save_model({1, state.model, state.trace, norm.normalization, state.rng.cursor()}, path);
    ModelArchive back = load_model(path);

    CHECK(back.rng_cursor == state.rng.cursor());
    CHECK(back.model.layers.size() == state.model.layers.size());
    CHECK(back.model.layers.back().includes_features());
    CHECK(back.model.layers.back().leading_begin ==
          state.model.layers.back().leading_begin);
    CHECK(back.normalization.shift == norm.normalization.shift);
    CHECK(back.normalization.scale == norm.normalization.scale);
    CHECK(back.trace.initial_residual_norm == state.trace.initial_residual_norm);
    REQUIRE(back.trace.layers.size() == state.trace.layers.size());
    for (std::size_t i = 0; i < back.trace.layers.size(); ++i)
        CHECK(back.trace.layers[i].residual_norm_after ==
              state.trace.layers[i].residual_norm_after);

    Matrix fresh = ts::random_matrix(77, 12, 2);
    CHECK(predict(back.model, fresh) == predict(state.model, fresh));
}

TEST_CASE("archive failure modes") {
    TempDir tmp;
    Dataset ds = synth_regression(41, 30, RegressionTarget::sine_mix);
    ModelConfig cfg;
    cfg.n_feature_groups = 1;
    cfg.nodes_per_group = 3;
    cfg.n_layers = 2;
    cfg.enhancement_per_layer = 4;
    cfg.random.seed = 5;
    cfg.supervisory_mode = SupervisoryMode::off;
    TrainerState state = train(cfg, ds.x, ds.y);
    const std::string path = tmp.file("model.bin");
    save_model({1, state.model, state.trace, {}, state.rng.cursor()}, path);

    // Truncation: drop the tail of the file.
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    write_file(tmp.file("short.bin"), bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_model(tmp.file("short.bin")), std::runtime_error);

    // Version bump.
    std::string versioned = bytes;
    versioned[8] = 9;
    std::ofstream vout(tmp.file("versioned.bin"), std::ios::binary);
    vout.write(versioned.data(), static_cast<std::streamsize>(versioned.size()));
    vout.close();
    CHECK_THROWS_WITH_AS(load_model(tmp.file("versioned.bin")), doctest::Contains("version"),
                         std::runtime_error);

    // Not an archive at all.
    write_file(tmp.file("garbage.bin"), "not a model");
    CHECK_THROWS_AS(load_model(tmp.file("garbage.bin")), std::runtime_error);
}

TEST_CASE("trace csv round trip") {
    TempDir tmp;
    Dataset ds = synth_regression(51, 60, RegressionTarget::sine_mix);
    ModelConfig cfg;
    cfg.n_feature_groups = 2;
    cfg.nodes_per_group = 4;
    cfg.n_layers = 4;
    cfg.enhancement_per_layer = 5;
    cfg.random.seed = 3;
    cfg.supervisory_mode = SupervisoryMode::contraction;
    auto [model, trace] = train_bscrls(cfg, ds.x, ds.y);

    const std::string path = tmp.file("trace.csv");
    save_trace_csv(trace, path);
    TrainingTrace back = load_trace_csv(path);
    CHECK(back.initial_residual_norm == trace.initial_residual_norm);
    REQUIRE(back.layers.size() == trace.layers.size());
    for (std::size_t i = 0; i < trace.layers.size(); ++i) {
        CHECK(back.layers[i].residual_norm_before == trace.layers[i].residual_norm_before);
        CHECK(back.layers[i].residual_norm_after == trace.layers[i].residual_norm_after);
        CHECK(back.layers[i].contraction_ratio == trace.layers[i].contraction_ratio);
        CHECK(back.layers[i].mu == trace.layers[i].mu);
        CHECK(back.layers[i].retries_used == trace.layers[i].retries_used);
        CHECK(back.layers[i].accepted == trace.layers[i].accepted);
    }
}
