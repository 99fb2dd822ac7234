#pragma once

// Constructive one-node-at-a-time approximation with a data-adaptive
// acceptance test on each random basis function. Function-space norms are
// realized as uniform quadrature over a fixed sample grid (weight 1/N per
// point, i.e. root-mean-square over grid rows), which makes every quantity
// below deterministic and testable. A candidate g drawn for step m must
// satisfy, for every output column r,
//
//   <e_{m-1,r}, g>^2  >=  b_g^2 * delta_{m,r},
//   delta_{m,r} = (1 - gamma - mu_m) * ||e_{m-1,r}||^2,
//
// after which its output weight is the least-squares coefficient
// beta_r = <e_{m-1,r}, g> / ||g||^2 and the residual column drops by exactly
// <e_{m-1,r}, g>^2 / ||g||^2 in squared norm.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bscrls/matrix.hpp"
#include "bscrls/random.hpp"

namespace bscrls {

struct ScnNode {
    std::vector<double> w;     // input weights, one per grid dimension
    double b = 0.0;            // bias
    std::vector<double> beta;  // output weights, one per target column
};

struct ScnState {
    std::vector<ScnNode> nodes;
    Matrix residual_samples;  // grid rows x output columns
    double gamma = 0.9;
    double b_g = 1.01;  // upper bound on the grid norm of any basis function
};

struct ScnTraceEntry {
    double norm_before = 0.0;
    double norm_after = 0.0;
    double mu = 0.0;
    std::size_t retries_used = 0;
    double scale = 1.0;  // parameter range multiplier of the accepted draw
};

struct ScnTrace {
    std::vector<ScnTraceEntry> nodes;
    bool stopped_early = false;
};

// Quadrature inner product between two grid vectors.
inline double grid_inner(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size() || u.empty())
        throw std::invalid_argument("grid_inner: vectors must match and be non-empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * v[i];
    return sum / static_cast<double>(u.size());
}

inline double grid_norm(const std::vector<double>& u) { return std::sqrt(grid_inner(u, u)); }

inline double column_inner(const Matrix& residual, std::size_t col, const std::vector<double>& g) {
    if (g.size() != residual.rows())
        throw std::invalid_argument("column_inner: grid size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < residual.rows(); ++i) sum += residual(i, col) * g[i];
    return sum / static_cast<double>(residual.rows());
}

inline double column_norm_sq(const Matrix& residual, std::size_t col) {
    double sum = 0.0;
    for (std::size_t i = 0; i < residual.rows(); ++i) sum += residual(i, col) * residual(i, col);
    return sum / static_cast<double>(residual.rows());
}

// Sigmoid basis function evaluated on every grid row.
inline std::vector<double> scn_basis(const Matrix& grid, const std::vector<double>& w, double b) {
    if (w.size() != grid.cols())
        throw std::invalid_argument("scn_basis: weight dimension does not match the grid");
    std::vector<double> g(grid.rows());
    for (std::size_t i = 0; i < grid.rows(); ++i) {
        double t = b;
        for (std::size_t d = 0; d < grid.cols(); ++d) t += w[d] * grid(i, d);
        g[i] = 1.0 / (1.0 + std::exp(-t));
    }
    return g;
}

// Per-output acceptance margin (1 - gamma - mu) * ||e_r||^2.
inline std::vector<double> scn_delta(const Matrix& residual, double gamma, double mu) {
    if (!(mu >= 0.0) || mu > 1.0 - gamma + 1e-15)
        throw std::invalid_argument("scn_delta: mu must lie in [0, 1 - gamma]");
    // Mathematically non-negative; clamp away roundoff when gamma + mu == 1.
    const double factor = std::max(0.0, 1.0 - gamma - mu);
    std::vector<double> delta(residual.cols());
    for (std::size_t r = 0; r < residual.cols(); ++r)
        delta[r] = factor * column_norm_sq(residual, r);
    return delta;
}

// True iff <e_r, g>^2 >= b_g^2 * delta_r for every output column.
inline bool scn_candidate_check(const Matrix& residual, const std::vector<double>& g, double b_g,
                                const std::vector<double>& delta) {
    if (grid_norm(g) == 0.0)
        throw std::invalid_argument("scn_candidate_check: basis function is zero on the grid");
    if (delta.size() != residual.cols())
        throw std::invalid_argument("scn_candidate_check: delta size mismatch");
    for (std::size_t r = 0; r < residual.cols(); ++r) {
        const double ip = column_inner(residual, r, g);
        if (ip * ip < b_g * b_g * delta[r]) return false;
    }
    return true;
}

// Least-squares coefficient of g against each residual column.
inline std::vector<double> scn_beta(const Matrix& residual, const std::vector<double>& g) {
    const double gg = grid_inner(g, g);
    if (gg == 0.0)
        throw std::invalid_argument("scn_beta: basis function is zero on the grid");
    std::vector<double> beta(residual.cols());
    for (std::size_t r = 0; r < residual.cols(); ++r)
        beta[r] = column_inner(residual, r, g) / gg;
    return beta;
}

// Norm bound for the sigmoid basis family: values lie in (0, 1), so the grid
// norm never exceeds 1; 1.01 adds slack.
inline double scn_default_basis_bound() { return 1.01; }

inline Matrix scn_predict(const ScnState& state, const Matrix& points) {
    if (state.nodes.empty())
        throw std::invalid_argument("scn_predict: no nodes");
    Matrix out(points.rows(), state.nodes.front().beta.size(), 0.0);
    for (const ScnNode& node : state.nodes) {
        std::vector<double> g = scn_basis(points, node.w, node.b);
        for (std::size_t i = 0; i < points.rows(); ++i)
            for (std::size_t r = 0; r < out.cols(); ++r) out(i, r) += node.beta[r] * g[i];
    }
    return out;
}

// Grows nodes one at a time. For node m, candidates are drawn with widening
// parameter ranges (scale ladder below, max_retries draws per scale) until one
// passes the acceptance test with mu_m = (1 - gamma) / (m + 1); if none does,
// construction stops early and the trace is flagged.
inline std::pair<ScnState, ScnTrace> scn_train(const Matrix& target_fn_samples, const Matrix& grid,
                                               double gamma, double b_g, std::size_t max_nodes,
                                               std::size_t max_retries, const RandomSpec& random) {
    if (grid.rows() < 2)
        throw std::invalid_argument("scn_train: grid needs at least two points");
    if (grid.rows() != target_fn_samples.rows())
        throw std::invalid_argument("scn_train: target samples do not match the grid");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("scn_train: gamma must lie in (0, 1)");
    if (max_nodes == 0 || max_retries == 0)
        throw std::invalid_argument("scn_train: max_nodes and max_retries must be positive");

    static constexpr double kScales[] = {1.0, 5.0, 10.0, 30.0, 50.0, 100.0, 150.0, 200.0};

    RandomStream rng(random);
    ScnState state;
    state.residual_samples = target_fn_samples;
    state.gamma = gamma;
    state.b_g = b_g;

    ScnTrace trace;
    const std::size_t d = grid.cols();
    const std::size_t c = target_fn_samples.cols();

    for (std::size_t m = 1; m <= max_nodes; ++m) {
        const double mu = (1.0 - gamma) / static_cast<double>(m + 1);
        const std::vector<double> delta = scn_delta(state.residual_samples, gamma, mu);

        double norm_before_sq = 0.0;
        for (std::size_t r = 0; r < c; ++r) norm_before_sq += column_norm_sq(state.residual_samples, r);

        bool found = false;
        std::vector<double> w(d);
        double b = 0.0;
        std::vector<double> g;
        std::size_t rejected = 0;
        double accepted_scale = 1.0;

        for (double scale : kScales) {
            for (std::size_t attempt = 0; attempt < max_retries && !found; ++attempt) {
                for (std::size_t dim = 0; dim < d; ++dim) w[dim] = scale * rng.next();
                b = scale * rng.next();
                g = scn_basis(grid, w, b);
                if (scn_candidate_check(state.residual_samples, g, b_g, delta)) {
                    found = true;
                    accepted_scale = scale;
                } else {
                    ++rejected;
                }
            }
            if (found) break;
        }
        if (!found) {
            trace.stopped_early = true;
            break;
        }

        std::vector<double> beta = scn_beta(state.residual_samples, g);
        for (std::size_t i = 0; i < grid.rows(); ++i)
            for (std::size_t r = 0; r < c; ++r) state.residual_samples(i, r) -= beta[r] * g[i];
        state.nodes.push_back({w, b, std::move(beta)});

        double norm_after_sq = 0.0;
        for (std::size_t r = 0; r < c; ++r) norm_after_sq += column_norm_sq(state.residual_samples, r);
        trace.nodes.push_back({std::sqrt(norm_before_sq), std::sqrt(norm_after_sq), mu, rejected,
                               accepted_scale});
    }
    return {std::move(state), std::move(trace)};
}

} // namespace bscrls
