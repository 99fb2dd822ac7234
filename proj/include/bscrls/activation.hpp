#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bscrls/matrix.hpp"

namespace bscrls {

enum class Activation { sigmoid, tanh, identity };

inline double activate_scalar(double x, Activation act) {
    switch (act) {
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Activation::tanh: return std::tanh(x);
        case Activation::identity: return x;
    }
    throw std::logic_error("activate_scalar: unknown activation");
}

inline Matrix apply_activation(const Matrix& a, Activation act) {
    if (act == Activation::identity) return a;
    Matrix out = a;
    double* p = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) p[i] = activate_scalar(p[i], act);
    return out;
}

inline const char* activation_name(Activation act) {
    switch (act) {
        case Activation::sigmoid: return "sigmoid";
        case Activation::tanh: return "tanh";
        case Activation::identity: return "identity";
    }
    return "?";
}

inline Activation parse_activation(std::string_view name) {
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    if (name == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation: " + std::string(name));
}

} // namespace bscrls
