#pragma once

// Binary classification metrics and per-depth error curves. Ratios with a
// zero denominator are reported as absent rather than coerced to zero.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bscrls/matrix.hpp"
#include "bscrls/model.hpp"

namespace bscrls {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

struct BinaryMetrics {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> fpr;
    std::optional<double> fnr;
};

inline ConfusionCounts confusion_counts(const std::vector<int>& predictions,
                                        const std::vector<int>& labels, int positive) {
    if (predictions.size() != labels.size() || predictions.empty())
        throw std::invalid_argument("confusion_counts: prediction and label lengths differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool pred_pos = predictions[i] == positive;
        const bool is_pos = labels[i] == positive;
        if (pred_pos && is_pos) ++c.tp;
        else if (pred_pos && !is_pos) ++c.fp;
        else if (!pred_pos && is_pos) ++c.fn;
        else ++c.tn;
    }
    return c;
}

inline BinaryMetrics binary_metrics(const std::vector<int>& predictions,
                                    const std::vector<int>& labels, int positive) {
    const ConfusionCounts c = confusion_counts(predictions, labels, positive);
    BinaryMetrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    if (c.fp + c.tn > 0) m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
    if (c.fn + c.tp > 0) m.fnr = static_cast<double>(c.fn) / static_cast<double>(c.fn + c.tp);
    return m;
}

// Class index per row by largest score; ties go to the lower index.
inline std::vector<int> argmax_labels(const Matrix& scores) {
    std::vector<int> labels(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < scores.cols(); ++j)
            if (scores(i, j) > scores(i, best)) best = j;
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

// ||E_t|| as recorded while training; t = 0 is the initial residual.
inline double training_error(const TrainingTrace& trace, std::size_t t) {
    if (t == 0) return trace.initial_residual_norm;
    if (t > trace.layers.size())
        throw std::out_of_range("training_error: depth exceeds trace length");
    return trace.layers[t - 1].residual_norm_after;
}

// Error of the depth-t truncated model on held-out data.
inline double testing_error(const BroadModel& model, const Matrix& x_test, const Matrix& y_test,
                            std::size_t t) {
    if (x_test.rows() != y_test.rows())
        throw std::invalid_argument("testing_error: X and Y row counts differ");
    if (t == 0) return frobenius_norm(y_test);
    return frobenius_norm(y_test - predict_truncated(model, x_test, t));
}

} // namespace bscrls
