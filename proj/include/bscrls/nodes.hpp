#pragma once

// Random node construction. A feature group maps the raw input through a
// random affine map and a feature function; an enhancement group does the
// same over the concatenated feature nodes. Biases are stored as a single
// row and broadcast over all samples.

#include <stdexcept>

#include "bscrls/activation.hpp"
#include "bscrls/matrix.hpp"

namespace bscrls {

struct FeatureGroup {
    Matrix w_e;     // input dim x group width
    Matrix beta_e;  // 1 x group width
    Activation activation = Activation::sigmoid;
};

struct EnhancementGroup {
    Matrix w_h;     // feature width x node count
    Matrix beta_h;  // 1 x node count
    Activation activation = Activation::sigmoid;
};

// x * w + broadcast bias row.
inline Matrix affine_map(const Matrix& x, const Matrix& w, const Matrix& beta) {
    if (x.cols() != w.rows())
        throw std::invalid_argument("affine_map: input width does not match weight rows");
    if (beta.rows() != 1 || beta.cols() != w.cols())
        throw std::invalid_argument("affine_map: bias must be a single row matching the output width");
    Matrix out = x * w;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += beta(0, j);
    return out;
}

inline Matrix make_feature_nodes(const Matrix& x, const FeatureGroup& group) {
    return apply_activation(affine_map(x, group.w_e, group.beta_e), group.activation);
}

inline Matrix make_enhancement_nodes(const Matrix& z, const EnhancementGroup& group) {
    return apply_activation(affine_map(z, group.w_h, group.beta_h), group.activation);
}

} // namespace bscrls
