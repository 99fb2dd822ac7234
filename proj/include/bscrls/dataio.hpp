#pragma once

// Dataset ingestion and generation: CSV load/save with one-hot label
// encoding, per-column normalization with a reusable transform record,
// deterministic synthetic datasets, and trace CSV persistence.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bscrls/matrix.hpp"
#include "bscrls/model.hpp"
#include "bscrls/random.hpp"

namespace bscrls {

// Affine transform applied to the feature columns: x' = (x - shift) * scale.
// Empty vectors mean the identity.
struct Normalization {
    std::vector<double> shift;
    std::vector<double> scale;

    bool is_identity() const { return shift.empty(); }
};

enum class NormalizeMode { none, minmax_to_unit, zscore };

inline NormalizeMode parse_normalize_mode(std::string_view name) {
    if (name == "none") return NormalizeMode::none;
    if (name == "minmax") return NormalizeMode::minmax_to_unit;
    if (name == "zscore") return NormalizeMode::zscore;
    throw std::invalid_argument("unknown normalization mode: " + std::string(name));
}

struct Dataset {
    Matrix x;
    Matrix y;
    std::vector<std::string> label_names;  // empty for numeric targets
    Normalization normalization;           // transform already applied to x
};

struct CsvSchema {
    std::vector<std::size_t> target_columns;
    bool has_header = true;
    char delimiter = ',';
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += ch;
            }
        } else if (ch == '"' && cell.empty()) {
            quoted = true;
        } else if (ch == delimiter) {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += ch;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

inline std::optional<double> parse_number(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    char* end = nullptr;
    const double value = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size()) return std::nullopt;
    return value;
}

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// Loads a delimited text file. Columns listed in the schema become targets:
// if every target cell is numeric they pass through as-is, otherwise a single
// label column is one-hot encoded with names sorted alphabetically.
inline Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;
    std::string line;
    std::size_t line_no = 0;
    bool skipped_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (schema.has_header && !skipped_header) {
            skipped_header = true;
            continue;
        }
        rows.push_back(detail::split_csv_line(line, schema.delimiter));
        row_lines.push_back(line_no);
        if (rows.size() > 1 && rows.back().size() != rows.front().size())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(rows.front().size()) + " fields, got " +
                                     std::to_string(rows.back().size()));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: " + path + " has no data rows");

    const std::size_t n_cols = rows.front().size();
    std::vector<bool> is_target(n_cols, false);
    for (std::size_t t : schema.target_columns) {
        if (t >= n_cols)
            throw std::runtime_error("load_csv: target column " + std::to_string(t) +
                                     " out of range");
        is_target[t] = true;
    }
    std::size_t n_features = 0;
    for (bool b : is_target)
        if (!b) ++n_features;
    if (n_features == 0 || schema.target_columns.empty())
        throw std::runtime_error("load_csv: need at least one feature and one target column");

    // Decide numeric vs categorical targets.
    bool numeric_targets = true;
    for (const auto& row : rows) {
        for (std::size_t t : schema.target_columns)
            if (!detail::parse_number(row[t])) numeric_targets = false;
        if (!numeric_targets) break;
    }
    if (!numeric_targets && schema.target_columns.size() != 1)
        throw std::runtime_error("load_csv: categorical targets must be a single column");

    Dataset ds;
    ds.x = Matrix(rows.size(), n_features);

    if (numeric_targets) {
        ds.y = Matrix(rows.size(), schema.target_columns.size());
    } else {
        std::vector<std::string> names;
        for (const auto& row : rows) names.push_back(row[schema.target_columns.front()]);
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        ds.label_names = names;
        ds.y = Matrix(rows.size(), names.size());
    }

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        std::size_t f = 0;
        for (std::size_t jcol = 0; jcol < n_cols; ++jcol) {
            if (is_target[jcol]) continue;
            const auto value = detail::parse_number(row[jcol]);
            if (!value)
                throw std::runtime_error(path + ":" + std::to_string(row_lines[i]) +
                                         ": non-numeric feature value '" + row[jcol] + "'");
            ds.x(i, f++) = *value;
        }
        if (numeric_targets) {
            for (std::size_t t = 0; t < schema.target_columns.size(); ++t)
                ds.y(i, t) = *detail::parse_number(row[schema.target_columns[t]]);
        } else {
            const std::string& name = row[schema.target_columns.front()];
            const auto it = std::lower_bound(ds.label_names.begin(), ds.label_names.end(), name);
            ds.y(i, static_cast<std::size_t>(it - ds.label_names.begin())) = 1.0;
        }
    }
    if (!ds.x.all_finite() || !ds.y.all_finite())
        throw std::runtime_error("load_csv: " + path + " contains non-finite values");
    return ds;
}

// Writes features plus either a label column (one-hot decoded by argmax) or
// the raw numeric target columns. Full float precision, so a save/load round
// trip reproduces the matrices bit for bit.
inline void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open " + path);
    for (std::size_t j = 0; j < ds.x.cols(); ++j) out << "f" << j << ",";
    if (!ds.label_names.empty()) {
        out << "label\n";
    } else {
        for (std::size_t j = 0; j < ds.y.cols(); ++j)
            out << "y" << j << (j + 1 < ds.y.cols() ? "," : "");
        out << "\n";
    }
    for (std::size_t i = 0; i < ds.x.rows(); ++i) {
        for (std::size_t j = 0; j < ds.x.cols(); ++j)
            out << detail::format_full(ds.x(i, j)) << ",";
        if (!ds.label_names.empty()) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < ds.y.cols(); ++j)
                if (ds.y(i, j) > ds.y(i, best)) best = j;
            out << ds.label_names[best] << "\n";
        } else {
            for (std::size_t j = 0; j < ds.y.cols(); ++j)
                out << detail::format_full(ds.y(i, j)) << (j + 1 < ds.y.cols() ? "," : "");
            out << "\n";
        }
    }
}

inline Matrix apply_normalization(const Normalization& norm, const Matrix& x) {
    if (norm.is_identity()) return x;
    if (norm.shift.size() != x.cols())
        throw std::invalid_argument("apply_normalization: column count mismatch");
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j)
            out(i, j) = (out(i, j) - norm.shift[j]) * norm.scale[j];
    return out;
}

// Applies a per-column transform to the features and records the composite
// raw-to-current transform so prediction-time inputs can be mapped
// identically. Constant columns map to 0.5 (minmax) or 0 (zscore).
inline Dataset normalize(const Dataset& ds, NormalizeMode mode) {
    if (mode == NormalizeMode::none) return ds;
    const std::size_t n = ds.x.rows(), m = ds.x.cols();
    std::vector<double> shift(m, 0.0), scale(m, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        if (mode == NormalizeMode::minmax_to_unit) {
            double lo = ds.x(0, j), hi = ds.x(0, j);
            for (std::size_t i = 1; i < n; ++i) {
                lo = std::min(lo, ds.x(i, j));
                hi = std::max(hi, ds.x(i, j));
            }
            if (hi > lo) {
                shift[j] = lo;
                scale[j] = 1.0 / (hi - lo);
            } else {
                shift[j] = lo - 0.5;
                scale[j] = 1.0;
            }
        } else {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += ds.x(i, j);
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = ds.x(i, j) - mean;
                var += d * d;
            }
            var /= static_cast<double>(n);
            shift[j] = mean;
            scale[j] = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
        }
    }

    Dataset out = ds;
    Normalization step{std::move(shift), std::move(scale)};
    out.x = apply_normalization(step, ds.x);
    if (ds.normalization.is_identity()) {
        out.normalization = std::move(step);
    } else {
        // Compose: raw -> current -> new.
        Normalization composed;
        composed.shift.resize(m);
        composed.scale.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            composed.shift[j] = ds.normalization.shift[j] + step.shift[j] / ds.normalization.scale[j];
            composed.scale[j] = ds.normalization.scale[j] * step.scale[j];
        }
        out.normalization = std::move(composed);
    }
    return out;
}

// Two noisy arcs in the plane with one-hot labels, alternating classes for an
// exact 50/50 balance. At noise zero the arcs are disjoint with a gap along
// the second coordinate, so the classes are linearly separable.
inline Dataset synth_classification(std::uint64_t seed, std::size_t n, double noise) {
    if (n < 4) throw std::invalid_argument("synth_classification: need at least 4 samples");
    RandomStream rng({seed, 0.0, 1.0});
    Dataset ds;
    ds.x = Matrix(n, 2);
    ds.y = Matrix(n, 2);
    ds.label_names = {"class0", "class1"};
    constexpr double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % 2;
        const double angle = pi * rng.next_unit();
        // Box-Muller pair for the noise displacement.
        const double u1 = 1.0 - rng.next_unit();
        const double u2 = rng.next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double g1 = radius * std::cos(2.0 * pi * u2);
        const double g2 = radius * std::sin(2.0 * pi * u2);
        double cx, cy;
        if (cls == 0) {
            cx = std::cos(angle);
            cy = std::sin(angle);
        } else {
            cx = -std::cos(angle);
            cy = -std::sin(angle) - 0.15;
        }
        ds.x(i, 0) = cx + noise * g1;
        ds.x(i, 1) = cy + noise * g2;
        ds.y(i, cls) = 1.0;
    }
    return ds;
}

enum class RegressionTarget { sine_mix, bump_mix, constant };

inline RegressionTarget parse_regression_target(std::string_view name) {
    if (name == "sine-mix") return RegressionTarget::sine_mix;
    if (name == "bump-mix") return RegressionTarget::bump_mix;
    if (name == "constant") return RegressionTarget::constant;
    throw std::invalid_argument("unknown regression target: " + std::string(name));
}

// Closed-form target value at a point of [0,1]^5.
inline double regression_target_value(RegressionTarget fn, const double* x) {
    constexpr double pi = 3.14159265358979323846;
    switch (fn) {
        case RegressionTarget::sine_mix:
            return std::sin(2.0 * pi * x[0]) + 0.5 * std::sin(4.0 * pi * x[1]) + 0.25 * x[2] +
                   0.1 * std::cos(2.0 * pi * x[3]) - 0.2 * x[4] * x[4];
        case RegressionTarget::bump_mix:
            return std::exp(-8.0 * (x[0] - 0.3) * (x[0] - 0.3)) -
                   0.5 * std::exp(-12.0 * (x[1] - 0.7) * (x[1] - 0.7)) +
                   0.25 * std::exp(-10.0 * (x[2] - 0.5) * (x[2] - 0.5)) + 0.1 * x[3] * x[4];
        case RegressionTarget::constant:
            return 1.0;
    }
    throw std::logic_error("regression_target_value: unknown target");
}

// Inputs uniform on [0,1]^5 with a smooth scalar target.
inline Dataset synth_regression(std::uint64_t seed, std::size_t n, RegressionTarget fn) {
    if (n < 10) throw std::invalid_argument("synth_regression: need at least 10 samples");
    RandomStream rng({seed, 0.0, 1.0});
    Dataset ds;
    ds.x = Matrix(n, 5);
    ds.y = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        double row[5];
        for (double& v : row) v = rng.next_unit();
        for (std::size_t j = 0; j < 5; ++j) ds.x(i, j) = row[j];
        ds.y(i, 0) = regression_target_value(fn, row);
    }
    return ds;
}

// Seeded shuffle split; the first (1 - test_fraction) of the permutation
// becomes the training part.
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                                    std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("split_train_test: fraction must lie in (0, 1)");
    const std::size_t n = ds.x.rows();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RandomStream rng({seed, 0.0, 1.0});
    for (std::size_t i = n; i-- > 1;) {
        const std::size_t j = static_cast<std::size_t>(rng.next_unit() * static_cast<double>(i + 1));
        std::swap(order[i], order[std::min(j, i)]);
    }
    const std::size_t n_test = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                            test_fraction * static_cast<double>(n)));
    const std::size_t n_train = n - n_test;
    if (n_train == 0) throw std::invalid_argument("split_train_test: no training rows left");

    auto take = [&](std::size_t begin, std::size_t count) {
        Dataset part;
        part.x = Matrix(count, ds.x.cols());
        part.y = Matrix(count, ds.y.cols());
        part.label_names = ds.label_names;
        part.normalization = ds.normalization;
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t src = order[begin + i];
            for (std::size_t j = 0; j < ds.x.cols(); ++j) part.x(i, j) = ds.x(src, j);
            for (std::size_t j = 0; j < ds.y.cols(); ++j) part.y(i, j) = ds.y(src, j);
        }
        return part;
    };
    return {take(0, n_train), take(n_train, n_test)};
}

// Trace persistence as CSV; row 0 carries the initial residual norm.
inline void save_trace_csv(const TrainingTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_trace_csv: cannot open " + path);
    out << "layer,residual_before,residual_after,contraction_ratio,mu,retries,accepted,wall_time_s\n";
    out << "0," << detail::format_full(trace.initial_residual_norm) << ","
        << detail::format_full(trace.initial_residual_norm) << ",1,0,0,1,0\n";
    for (std::size_t j = 0; j < trace.layers.size(); ++j) {
        const LayerRecord& r = trace.layers[j];
        out << (j + 1) << "," << detail::format_full(r.residual_norm_before) << ","
            << detail::format_full(r.residual_norm_after) << ","
            << detail::format_full(r.contraction_ratio) << "," << detail::format_full(r.mu) << ","
            << r.retries_used << "," << (r.accepted ? 1 : 0) << ","
            << detail::format_full(r.wall_time_s) << "\n";
    }
}

inline TrainingTrace load_trace_csv(const std::string& path) {
    const CsvSchema schema{{0}, true, ','};
    const Dataset table = load_csv(path, schema);
    if (table.x.cols() != 7)
        throw std::runtime_error("load_trace_csv: " + path + " is not a trace table");
    TrainingTrace trace;
    trace.initial_residual_norm = table.x(0, 0);
    for (std::size_t i = 1; i < table.x.rows(); ++i) {
        LayerRecord r;
        r.residual_norm_before = table.x(i, 0);
        r.residual_norm_after = table.x(i, 1);
        r.contraction_ratio = table.x(i, 2);
        r.mu = table.x(i, 3);
        r.retries_used = static_cast<std::size_t>(table.x(i, 4));
        r.accepted = table.x(i, 5) != 0.0;
        r.wall_time_s = table.x(i, 6);
        trace.layers.push_back(r);
    }
    return trace;
}

} // namespace bscrls
