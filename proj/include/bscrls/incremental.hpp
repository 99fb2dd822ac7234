#pragma once

// Incremental growth of a trained model: new enhancement layers, new feature
// groups, and new training rows, each appended as one more residual layer
// instead of retraining from scratch. All three continue the model's random
// stream in the canonical order, so an enhancement increment reproduces what
// from-scratch training with one extra layer would have built.

#include <chrono>
#include <cstddef>
#include <stdexcept>

#include "bscrls/matrix.hpp"
#include "bscrls/model.hpp"
#include "bscrls/trainer.hpp"

namespace bscrls {

enum class IncrementKind { enhancement, feature, data };

struct IncrementEvent {
    IncrementKind kind = IncrementKind::enhancement;
    std::size_t layer_index = 0;  // 1-based index of the appended layer
    std::size_t added_columns = 0;
    std::size_t added_rows = 0;
    LayerRecord record;
    bool gated = false;  // whether a supervisory mode other than off was applied
};

namespace detail {

inline void require_consistent(const TrainerState& state) {
    if (state.model.layers.empty())
        throw std::invalid_argument("increment: model has no layers");
    if (state.residual.rows() != state.z_cache.rows() ||
        state.residual.rows() != state.x_total.rows() ||
        state.x_total.rows() != state.y_total.rows())
        throw std::invalid_argument("increment: state row counts are inconsistent");
    if (state.residual.cols() != state.model.output_dim)
        throw std::invalid_argument("increment: residual width does not match the model");
}

inline LayerRecord finish_layer(TrainerState& state, detail::LayerGrowth&& growth,
                                double before, double mu, ResidualLayer&& layer,
                                std::chrono::steady_clock::time_point t0) {
    layer.w_out = std::move(growth.w_out);
    state.model.layers.push_back(std::move(layer));
    state.residual = std::move(growth.e_next);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    LayerRecord record{before, frobenius_norm(state.residual), growth.ratio, mu,
                       growth.retries_used, growth.accepted, seconds};
    state.trace.layers.push_back(record);
    return record;
}

} // namespace detail

// Appends one enhancement layer over the cached feature nodes.
inline IncrementEvent add_enhancement_layer(TrainerState& state, double gamma) {
    detail::require_consistent(state);
    const auto t0 = std::chrono::steady_clock::now();
    const ModelConfig& cfg = state.model.config;
    const std::size_t j = state.model.layers.size() + 1;
    const double mu = mu_schedule(gamma, j);
    const double before = frobenius_norm(state.residual);

    detail::LayerGrowth growth = detail::grow_layer(
        state.z_cache, nullptr, state.residual, cfg.enhancement_per_layer, cfg.activation,
        cfg.lambda, cfg.use_exact_pinv, cfg.supervisory_mode, cfg.max_retries, gamma, mu,
        state.rng);

    ResidualLayer layer;
    layer.enhancement = std::move(growth.enhancement);
    layer.feature_groups_used = state.model.feature_groups.size();

    IncrementEvent event;
    event.kind = IncrementKind::enhancement;
    event.layer_index = j;
    event.added_columns = cfg.enhancement_per_layer;
    event.gated = cfg.supervisory_mode != SupervisoryMode::off;
    event.record = detail::finish_layer(state, std::move(growth), before, mu, std::move(layer), t0);
    return event;
}

// Draws one new feature group, widens the feature cache, and appends a layer
// whose node matrix is the new feature block beside enhancement nodes over the
// widened feature space. Retries redraw only the enhancement parameters; the
// feature group is drawn once.
inline IncrementEvent add_feature_group(TrainerState& state, double gamma) {
    detail::require_consistent(state);
    const auto t0 = std::chrono::steady_clock::now();
    const ModelConfig& cfg = state.model.config;
    const std::size_t j = state.model.layers.size() + 1;
    const double mu = mu_schedule(gamma, j);
    const double before = frobenius_norm(state.residual);

    FeatureGroup group{state.rng.draw(state.x_total.cols(), cfg.nodes_per_group),
                       state.rng.draw(1, cfg.nodes_per_group), cfg.activation};
    Matrix z_new = make_feature_nodes(state.x_total, group);
    state.z_cache = concat_columns({state.z_cache, z_new});

    detail::LayerGrowth growth = detail::grow_layer(
        state.z_cache, &z_new, state.residual, cfg.enhancement_per_layer, cfg.activation,
        cfg.lambda, cfg.use_exact_pinv, cfg.supervisory_mode, cfg.max_retries, gamma, mu,
        state.rng);

    const std::size_t group_index = state.model.feature_groups.size();
    state.model.feature_groups.push_back(std::move(group));

    ResidualLayer layer;
    layer.enhancement = std::move(growth.enhancement);
    layer.feature_groups_used = group_index + 1;
    layer.leading_begin = group_index;
    layer.leading_end = group_index + 1;

    IncrementEvent event;
    event.kind = IncrementKind::feature;
    event.layer_index = j;
    event.added_columns = cfg.nodes_per_group + cfg.enhancement_per_layer;
    event.gated = cfg.supervisory_mode != SupervisoryMode::off;
    event.record = detail::finish_layer(state, std::move(growth), before, mu, std::move(layer), t0);
    return event;
}

// Residual over old and new rows before the data-increment layer is solved:
// the stored residual stacked on top of the model's error on the new rows.
inline Matrix assemble_combined_residual(const BroadModel& model, const Matrix& residual,
                                         const Matrix& x_a, const Matrix& y_a) {
    Matrix new_error = y_a - predict(model, x_a);
    return concat_rows({residual, new_error});
}

// Appends new training rows and one enhancement layer fitted to the combined
// residual over all rows. The printed procedure applies no gate to this layer;
// `apply_gate` keeps the model's gate on by default, with opt-out for
// fidelity runs. The event records which behaviour ran.
inline IncrementEvent add_input_data(TrainerState& state, const Matrix& x_a, const Matrix& y_a,
                                     double gamma, bool apply_gate = true) {
    detail::require_consistent(state);
    if (x_a.cols() != state.x_total.cols())
        throw std::invalid_argument("add_input_data: new inputs have the wrong width");
    if (x_a.rows() != y_a.rows())
        throw std::invalid_argument("add_input_data: new input and target row counts differ");
    if (y_a.cols() != state.model.output_dim)
        throw std::invalid_argument("add_input_data: new targets have the wrong width");

    const auto t0 = std::chrono::steady_clock::now();
    const ModelConfig& cfg = state.model.config;
    const std::size_t j = state.model.layers.size() + 1;
    const double mu = mu_schedule(gamma, j);

    Matrix combined = assemble_combined_residual(state.model, state.residual, x_a, y_a);
    const double before = frobenius_norm(combined);

    // Extend the caches to the new rows with the stored feature parameters.
    std::vector<Matrix> new_blocks;
    new_blocks.reserve(state.model.feature_groups.size());
    for (const FeatureGroup& g : state.model.feature_groups)
        new_blocks.push_back(make_feature_nodes(x_a, g));
    state.z_cache = concat_rows({state.z_cache, concat_columns(std::span<const Matrix>(new_blocks))});
    state.x_total = concat_rows({state.x_total, x_a});
    state.y_total = concat_rows({state.y_total, y_a});

    const SupervisoryMode mode = apply_gate ? cfg.supervisory_mode : SupervisoryMode::off;
    detail::LayerGrowth growth = detail::grow_layer(
        state.z_cache, nullptr, combined, cfg.enhancement_per_layer, cfg.activation, cfg.lambda,
        cfg.use_exact_pinv, mode, cfg.max_retries, gamma, mu, state.rng);

    ResidualLayer layer;
    layer.enhancement = std::move(growth.enhancement);
    layer.feature_groups_used = state.model.feature_groups.size();

    IncrementEvent event;
    event.kind = IncrementKind::data;
    event.layer_index = j;
    event.added_columns = cfg.enhancement_per_layer;
    event.added_rows = x_a.rows();
    event.gated = apply_gate && cfg.supervisory_mode != SupervisoryMode::off;
    event.record = detail::finish_layer(state, std::move(growth), before, mu, std::move(layer), t0);
    return event;
}

// Recomputes the residual from scratch and compares with the stored one.
inline bool verify_state_consistency(const TrainerState& state, double tolerance = 1e-8) {
    Matrix fresh = state.y_total - predict(state.model, state.x_total);
    return frobenius_norm(fresh - state.residual) <= tolerance;
}

// Rebuilds a growable state from a persisted model and its training data.
inline TrainerState rebuild_state(BroadModel model, TrainingTrace trace, const Matrix& x,
                                  const Matrix& y, std::uint64_t rng_cursor) {
    if (x.rows() != y.rows())
        throw std::invalid_argument("rebuild_state: X and Y row counts differ");
    std::vector<Matrix> blocks = feature_blocks(model, x);
    Matrix z = concat_columns(std::span<const Matrix>(blocks));
    Matrix residual = y - predict(model, x);
    RandomStream rng(model.config.random, rng_cursor);
    return TrainerState{std::move(model), std::move(trace), x, y, std::move(z),
                        std::move(residual), std::move(rng)};
}

} // namespace bscrls
