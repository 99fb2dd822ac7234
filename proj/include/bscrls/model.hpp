#pragma once

// Model structure shared by training, prediction, increments and persistence.
//
// A trained model is a list of feature groups plus an ordered list of residual
// layers. Each layer's node matrix K is the activation of the feature cache
// through that layer's enhancement map, optionally preceded by raw feature
// blocks: layer 1 prepends every initial feature group, and a layer created by
// a feature increment prepends the group added with it. `feature_groups_used`
// records how many groups were visible to the enhancement map when the layer
// was trained, so prediction reassembles the exact same K on new inputs.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bscrls/matrix.hpp"
#include "bscrls/nodes.hpp"
#include "bscrls/random.hpp"

namespace bscrls {

enum class SupervisoryMode { off, contraction, operator_norm };

inline const char* supervisory_mode_name(SupervisoryMode mode) {
    switch (mode) {
        case SupervisoryMode::off: return "off";
        case SupervisoryMode::contraction: return "contraction";
        case SupervisoryMode::operator_norm: return "operator_norm";
    }
    return "?";
}

inline SupervisoryMode parse_supervisory_mode(std::string_view name) {
    if (name == "off") return SupervisoryMode::off;
    if (name == "contraction") return SupervisoryMode::contraction;
    if (name == "operator_norm") return SupervisoryMode::operator_norm;
    throw std::invalid_argument("unknown supervisory mode: " + std::string(name));
}

struct ModelConfig {
    std::size_t n_feature_groups = 4;
    std::size_t nodes_per_group = 10;
    std::size_t n_layers = 10;
    std::size_t enhancement_per_layer = 20;
    double gamma = 0.9;
    std::vector<double> gamma_schedule;  // optional per-layer override, last value repeats
    double lambda = 1e-8;
    Activation activation = Activation::sigmoid;
    RandomSpec random;
    std::size_t max_retries = 8;  // candidate draws per layer, including the first
    SupervisoryMode supervisory_mode = SupervisoryMode::contraction;
    bool use_exact_pinv = false;  // solve layer weights with the pseudo-inverse instead of ridge

    double effective_gamma(std::size_t layer_index) const {
        if (gamma_schedule.empty()) return gamma;
        const std::size_t i = layer_index == 0 ? 0 : layer_index - 1;
        return gamma_schedule[std::min(i, gamma_schedule.size() - 1)];
    }

    void validate() const {
        if (n_feature_groups == 0 || nodes_per_group == 0 || n_layers == 0 ||
            enhancement_per_layer == 0)
            throw std::invalid_argument("ModelConfig: node and layer counts must be positive");
        if (!(gamma > 0.0 && gamma < 1.0))
            throw std::invalid_argument("ModelConfig: gamma must lie in (0, 1)");
        for (double g : gamma_schedule)
            if (!(g > 0.0 && g < 1.0))
                throw std::invalid_argument("ModelConfig: gamma schedule values must lie in (0, 1)");
        if (!(lambda > 0.0))
            throw std::invalid_argument("ModelConfig: lambda must be positive");
        if (max_retries == 0)
            throw std::invalid_argument("ModelConfig: max_retries must be at least 1");
        if (!(random.low < random.high))
            throw std::invalid_argument("ModelConfig: random range is empty");
    }
};

struct ResidualLayer {
    EnhancementGroup enhancement;
    Matrix w_out;                         // K-width x output dim
    std::size_t feature_groups_used = 0;  // groups feeding the enhancement input
    std::size_t leading_begin = 0;        // feature blocks [begin, end) prepended to K
    std::size_t leading_end = 0;

    bool includes_features() const { return leading_end > leading_begin; }
};

struct BroadModel {
    ModelConfig config;
    std::vector<FeatureGroup> feature_groups;
    std::vector<ResidualLayer> layers;
    std::size_t output_dim = 0;

    std::size_t input_dim() const {
        if (feature_groups.empty())
            throw std::logic_error("BroadModel: no feature groups");
        return feature_groups.front().w_e.rows();
    }
};

struct LayerRecord {
    double residual_norm_before = 0.0;
    double residual_norm_after = 0.0;
    double contraction_ratio = 0.0;
    double mu = 0.0;
    std::size_t retries_used = 0;  // candidates drawn beyond the first
    bool accepted = false;         // passed the supervisory check (always true with the gate off)
    double wall_time_s = 0.0;
};

struct TrainingTrace {
    double initial_residual_norm = 0.0;
    std::vector<LayerRecord> layers;
};

// One feature-node block per group, evaluated on x.
inline std::vector<Matrix> feature_blocks(const BroadModel& model, const Matrix& x) {
    if (x.cols() != model.input_dim())
        throw std::invalid_argument("feature_blocks: input width does not match the model");
    std::vector<Matrix> blocks;
    blocks.reserve(model.feature_groups.size());
    for (const FeatureGroup& g : model.feature_groups)
        blocks.push_back(make_feature_nodes(x, g));
    return blocks;
}

// Reassembles a layer's node matrix K from precomputed feature blocks.
inline Matrix layer_node_matrix(const std::vector<Matrix>& blocks, const ResidualLayer& layer) {
    if (layer.feature_groups_used == 0 || layer.feature_groups_used > blocks.size())
        throw std::invalid_argument("layer_node_matrix: inconsistent feature group count");
    std::vector<Matrix> z_parts(blocks.begin(),
                                blocks.begin() + static_cast<std::ptrdiff_t>(layer.feature_groups_used));
    Matrix h = make_enhancement_nodes(concat_columns(std::span<const Matrix>(z_parts)),
                                      layer.enhancement);
    if (!layer.includes_features()) return h;
    std::vector<Matrix> parts(blocks.begin() + static_cast<std::ptrdiff_t>(layer.leading_begin),
                              blocks.begin() + static_cast<std::ptrdiff_t>(layer.leading_end));
    parts.push_back(std::move(h));
    return concat_columns(std::span<const Matrix>(parts));
}

// Output of the first t layers: sum over layers of K_j * W_j.
inline Matrix predict_truncated(const BroadModel& model, const Matrix& x_new, std::size_t t) {
    if (t > model.layers.size())
        throw std::out_of_range("predict_truncated: depth exceeds layer count");
    const std::vector<Matrix> blocks = feature_blocks(model, x_new);
    Matrix out(x_new.rows(), model.output_dim, 0.0);
    for (std::size_t j = 0; j < t; ++j)
        out += layer_node_matrix(blocks, model.layers[j]) * model.layers[j].w_out;
    return out;
}

inline Matrix predict(const BroadModel& model, const Matrix& x_new) {
    return predict_truncated(model, x_new, model.layers.size());
}

// Vertical concatenation of every layer's output weights.
inline Matrix stacked_output_weights(const BroadModel& model) {
    if (model.layers.empty())
        throw std::logic_error("stacked_output_weights: model has no layers");
    std::vector<Matrix> parts;
    parts.reserve(model.layers.size());
    for (const ResidualLayer& layer : model.layers) parts.push_back(layer.w_out);
    return concat_rows(std::span<const Matrix>(parts));
}

} // namespace bscrls
