#pragma once

// Convergence diagnostics over a training trace. The per-layer decrease rate
// eps_m = (||E_{m-1}|| - ||E_m||) / ||E_{m-1}|| telescopes, so the product of
// (1 - eps_j) is a lower bound on the final relative residual: whenever the
// eps_j are summably small the product stays bounded away from zero and the
// run stagnates above that floor. The canonical example eps_j = 1/(4j^2) gives
// a product limit of 2/pi.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "bscrls/model.hpp"

namespace bscrls {

enum class Regime { convergent, stagnating, inconclusive };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::convergent: return "convergent";
        case Regime::stagnating: return "stagnating";
        case Regime::inconclusive: return "inconclusive";
    }
    return "?";
}

struct ConvergenceReport {
    std::vector<double> epsilons;
    double product_lower_bound = 1.0;
    bool product_underflowed = false;
    double final_relative_residual = 0.0;
    Regime regime = Regime::inconclusive;
};

// Observed per-layer decrease rates. A zero-norm predecessor ends the
// sequence (nothing further can decrease relatively).
inline std::vector<double> epsilon_sequence(const TrainingTrace& trace) {
    if (trace.layers.empty())
        throw std::invalid_argument("epsilon_sequence: trace has no layers");
    std::vector<double> eps;
    eps.reserve(trace.layers.size());
    double prev = trace.initial_residual_norm;
    for (const LayerRecord& rec : trace.layers) {
        if (!(prev > 0.0)) break;
        eps.push_back((prev - rec.residual_norm_after) / prev);
        prev = rec.residual_norm_after;
    }
    return eps;
}

struct StagnationProduct {
    double value = 1.0;
    bool underflowed = false;
};

// Product of (1 - eps_j) in index order. Above 10^4 terms the accumulation
// switches to log space to dodge gradual underflow; a vanished product is
// clamped to zero and flagged.
inline StagnationProduct stagnation_product(std::span<const double> epsilons) {
    for (double e : epsilons)
        if (!(e >= 0.0) || e >= 1.0)
            throw std::invalid_argument("stagnation_product: every epsilon must lie in [0, 1)");
    StagnationProduct result;
    if (epsilons.size() > 10000) {
        double log_sum = 0.0;
        for (double e : epsilons) log_sum += std::log1p(-e);
        result.value = std::exp(log_sum);
    } else {
        double prod = 1.0;
        for (double e : epsilons) prod *= 1.0 - e;
        result.value = prod;
    }
    if (result.value < std::numeric_limits<double>::min()) {
        result.value = 0.0;
        result.underflowed = true;
    }
    return result;
}

// The decrease rates of the 2/pi stagnation example, eps_j = 1/(4 j^2).
inline std::vector<double> wallis_epsilons(std::size_t m) {
    std::vector<double> eps(m);
    for (std::size_t j = 1; j <= m; ++j)
        eps[j - 1] = 1.0 / (4.0 * static_cast<double>(j) * static_cast<double>(j));
    return eps;
}

// Heuristic classification of a finished run. `tolerance` is the relative
// residual below which the run counts as converged; `horizon` is the tail
// length whose summed decrease rates decide stagnation. The an-priori rate
// bounds of the theory are not observable from a trace, so the label is a
// tail-sum heuristic rather than a proof.
inline ConvergenceReport classify_regime(const TrainingTrace& trace, double tolerance,
                                         std::size_t horizon) {
    if (horizon == 0)
        throw std::invalid_argument("classify_regime: horizon must be positive");
    ConvergenceReport report;
    report.epsilons = epsilon_sequence(trace);
    StagnationProduct prod = stagnation_product(report.epsilons);
    report.product_lower_bound = prod.value;
    report.product_underflowed = prod.underflowed;

    const double initial = trace.initial_residual_norm;
    const double final_norm = trace.layers.back().residual_norm_after;
    report.final_relative_residual = initial > 0.0 ? final_norm / initial : 0.0;

    if (report.final_relative_residual < tolerance) {
        report.regime = Regime::convergent;
        return report;
    }
    if (trace.layers.size() < 2) {
        report.regime = Regime::inconclusive;
        return report;
    }
    const std::size_t tail = std::min(horizon, report.epsilons.size());
    double tail_sum = 0.0;
    for (std::size_t i = report.epsilons.size() - tail; i < report.epsilons.size(); ++i)
        tail_sum += report.epsilons[i];
    report.regime = tail_sum < std::log(1.0 / 0.99) ? Regime::stagnating : Regime::inconclusive;
    return report;
}

} // namespace bscrls
