#pragma once

// Layer-by-layer residual training.
//
// Every layer solves W_j against the current residual E_{j-1} and updates
// E_j = E_{j-1} - K_j W_j (E_0 = Y). With the supervisory gate off this is the
// plain residual learner. With the gate on, each randomly drawn candidate
// layer must pass an acceptance test before it is kept:
//
//   contraction:    ||E_j|| / ||E_{j-1}||  <=  gamma + mu_j
//   operator_norm:  ||I - K_j K_j^+||_2    <=  gamma + mu_j
//
// where mu_j = (1 - gamma) / (j + 1) is a vanishing slack. Rejected candidates
// trigger a redraw of the enhancement parameters; when max_retries draws are
// exhausted the candidate with the smallest observed ratio is kept and the
// layer is flagged as not accepted by the check.
//
// The random stream is consumed in a fixed canonical order: feature groups in
// index order (weights then biases), then per layer the enhancement weights
// and biases, with every retry consuming fresh values. This makes incremental
// growth reproduce from-scratch training exactly.

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "bscrls/decomposition.hpp"
#include "bscrls/matrix.hpp"
#include "bscrls/model.hpp"
#include "bscrls/nodes.hpp"
#include "bscrls/random.hpp"

namespace bscrls {

// Vanishing slack for layer j (1-based): (1 - gamma) / (j + 1).
inline double mu_schedule(double gamma, std::size_t layer_index) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("mu_schedule: gamma must lie in (0, 1)");
    if (layer_index == 0)
        throw std::invalid_argument("mu_schedule: layers are 1-indexed");
    return (1.0 - gamma) / static_cast<double>(layer_index + 1);
}

struct AcceptanceRecord {
    bool accepted = false;
    double ratio = 0.0;  // ||e_next|| / ||e_prev||, 0 when the previous residual is zero
    Matrix candidate_w;
    Matrix e_next;
};

// Evaluates one candidate layer against the previous residual. The candidate
// weights and next residual are computed in every mode; only the acceptance
// decision differs. A zero previous residual is accepted trivially.
inline AcceptanceRecord supervisory_check(const Matrix& k, const Matrix& e_prev, double gamma,
                                          double mu, SupervisoryMode mode, double lambda,
                                          bool exact_pinv = false) {
    if (k.rows() != e_prev.rows())
        throw std::invalid_argument("supervisory_check: K and residual row counts differ");
    const double bound = gamma + mu;
    if (!(bound > 0.0) || bound > 1.0 + 1e-12)
        throw std::invalid_argument("supervisory_check: gamma + mu must lie in (0, 1]");

    AcceptanceRecord rec;
    rec.candidate_w = exact_pinv ? pseudo_inverse(k) * e_prev : ridge_solve(k, e_prev, lambda);
    rec.e_next = e_prev - k * rec.candidate_w;

    const double before = frobenius_norm(e_prev);
    if (before == 0.0) {
        rec.ratio = 0.0;
        rec.accepted = true;
        return rec;
    }
    rec.ratio = frobenius_norm(rec.e_next) / before;

    switch (mode) {
        case SupervisoryMode::off:
            rec.accepted = true;
            break;
        case SupervisoryMode::contraction:
            rec.accepted = rec.ratio <= bound;
            break;
        case SupervisoryMode::operator_norm:
            rec.accepted = projector_complement_norm(k) <= bound;
            break;
    }
    return rec;
}

namespace detail {

struct LayerGrowth {
    EnhancementGroup enhancement;
    Matrix w_out;
    Matrix e_next;
    double ratio = 0.0;
    bool accepted = false;
    std::size_t retries_used = 0;
};

// Draws candidate enhancement parameters until one passes the gate or the
// retry budget runs out, in which case the best-seen candidate is returned
// with accepted = false. `leading_block`, when present, is prepended to the
// activated nodes to form K.
inline LayerGrowth grow_layer(const Matrix& z_input, const Matrix* leading_block,
                              const Matrix& e_prev, std::size_t width, Activation act,
                              double lambda, bool exact_pinv, SupervisoryMode mode,
                              std::size_t max_attempts, double gamma, double mu,
                              RandomStream& rng) {
    LayerGrowth best;
    bool have_best = false;
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        EnhancementGroup enh{rng.draw(z_input.cols(), width), rng.draw(1, width), act};
        Matrix h = make_enhancement_nodes(z_input, enh);
        Matrix k = leading_block ? concat_columns({*leading_block, h}) : std::move(h);
        AcceptanceRecord rec = supervisory_check(k, e_prev, gamma, mu, mode, lambda, exact_pinv);
        if (rec.accepted) {
            return {std::move(enh), std::move(rec.candidate_w), std::move(rec.e_next),
                    rec.ratio, true, attempt};
        }
        if (!have_best || rec.ratio < best.ratio) {
            best = {std::move(enh), std::move(rec.candidate_w), std::move(rec.e_next),
                    rec.ratio, false, attempt};
            have_best = true;
        }
    }
    best.retries_used = max_attempts - 1;
    return best;
}

} // namespace detail

// Full training state: the model plus everything needed to keep growing it.
struct TrainerState {
    BroadModel model;
    TrainingTrace trace;
    Matrix x_total;   // all training inputs seen so far
    Matrix y_total;   // matching targets
    Matrix z_cache;   // concatenated feature nodes over all rows
    Matrix residual;  // current E_m
    RandomStream rng;
};

inline TrainerState train(const ModelConfig& config, const Matrix& x, const Matrix& y) {
    config.validate();
    if (x.rows() != y.rows())
        throw std::invalid_argument("train: X and Y row counts differ");
    if (!x.all_finite() || !y.all_finite())
        throw std::invalid_argument("train: inputs contain non-finite values");

    RandomStream rng(config.random);

    BroadModel model;
    model.config = config;
    model.output_dim = y.cols();

    std::vector<Matrix> blocks;
    blocks.reserve(config.n_feature_groups);
    for (std::size_t i = 0; i < config.n_feature_groups; ++i) {
        FeatureGroup g{rng.draw(x.cols(), config.nodes_per_group),
                       rng.draw(1, config.nodes_per_group), config.activation};
        blocks.push_back(make_feature_nodes(x, g));
        model.feature_groups.push_back(std::move(g));
    }
    Matrix z = concat_columns(std::span<const Matrix>(blocks));

    TrainingTrace trace;
    trace.initial_residual_norm = frobenius_norm(y);
    Matrix e = y;

    for (std::size_t j = 1; j <= config.n_layers; ++j) {
        const auto t0 = std::chrono::steady_clock::now();
        const double gamma_j = config.effective_gamma(j);
        const double mu_j = mu_schedule(gamma_j, j);
        const double before = frobenius_norm(e);
        const Matrix* leading = (j == 1) ? &z : nullptr;

        detail::LayerGrowth growth = detail::grow_layer(
            z, leading, e, config.enhancement_per_layer, config.activation, config.lambda,
            config.use_exact_pinv, config.supervisory_mode, config.max_retries, gamma_j, mu_j,
            rng);
        if (!growth.w_out.all_finite() || !growth.e_next.all_finite())
            throw std::runtime_error("train: non-finite values at layer " + std::to_string(j));

        ResidualLayer layer;
        layer.enhancement = std::move(growth.enhancement);
        layer.w_out = std::move(growth.w_out);
        layer.feature_groups_used = config.n_feature_groups;
        if (j == 1) {
            layer.leading_begin = 0;
            layer.leading_end = config.n_feature_groups;
        }
        model.layers.push_back(std::move(layer));
        e = std::move(growth.e_next);

        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trace.layers.push_back({before, frobenius_norm(e), growth.ratio, mu_j,
                                growth.retries_used, growth.accepted, seconds});
    }

    return TrainerState{std::move(model), std::move(trace), x, y, std::move(z), std::move(e),
                        std::move(rng)};
}

// Plain residual training, no gate.
inline std::pair<BroadModel, TrainingTrace> train_brls(const ModelConfig& config, const Matrix& x,
                                                       const Matrix& y) {
    if (config.supervisory_mode != SupervisoryMode::off)
        throw std::invalid_argument("train_brls: supervisory_mode must be off");
    TrainerState state = train(config, x, y);
    return {std::move(state.model), std::move(state.trace)};
}

// Gated training; every accepted-by-check layer contracts the residual by at
// least gamma + mu_j (contraction mode).
inline std::pair<BroadModel, TrainingTrace> train_bscrls(const ModelConfig& config,
                                                         const Matrix& x, const Matrix& y) {
    if (config.supervisory_mode == SupervisoryMode::off)
        throw std::invalid_argument("train_bscrls: supervisory_mode must be contraction or operator_norm");
    TrainerState state = train(config, x, y);
    return {std::move(state.model), std::move(state.trace)};
}

} // namespace bscrls
