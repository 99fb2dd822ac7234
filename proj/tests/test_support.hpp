#pragma once

// Shared helpers and independent oracles for the test suites. Everything here
// deliberately avoids the library's solver paths: spectral norms come from
// power iteration, linear systems from Gaussian elimination, matrix products
// from plain loops.

#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"

#include "bscrls/matrix.hpp"
#include "bscrls/random.hpp"

namespace test_support {

inline bscrls::Matrix random_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols,
                                    double low = -1.0, double high = 1.0) {
    return bscrls::draw_uniform({seed, low, high}, rows, cols);
}

inline double max_abs_diff(const bscrls::Matrix& a, const bscrls::Matrix& b) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    return worst;
}

inline double frob_diff(const bscrls::Matrix& a, const bscrls::Matrix& b) {
    return bscrls::frobenius_norm(a - b);
}

// Plain triple-loop product, independent of the library's operator*.
inline bscrls::Matrix loop_matmul(const bscrls::Matrix& a, const bscrls::Matrix& b) {
    bscrls::Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) sum += a(i, k) * b(k, j);
            c(i, j) = sum;
        }
    return c;
}

// Largest singular value by power iteration on A^T A.
inline double power_iteration_spectral_norm(const bscrls::Matrix& a, int iterations = 2000) {
    std::vector<double> v(a.cols());
    bscrls::RandomStream rng({977, -1.0, 1.0});
    for (double& x : v) x = rng.next();
    double sigma = 0.0;
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> av(a.rows(), 0.0);
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) av[i] += a(i, j) * v[j];
        std::vector<double> atav(a.cols(), 0.0);
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) atav[j] += a(i, j) * av[i];
        double nrm = 0.0;
        for (double x : atav) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) v[j] = atav[j] / nrm;
        sigma = std::sqrt(nrm);
    }
    return sigma;
}

// Gaussian elimination with partial pivoting; solves A X = B for square A.
inline bscrls::Matrix gauss_solve(bscrls::Matrix a, bscrls::Matrix b) {
    REQUIRE(a.rows() == a.cols());
    REQUIRE(a.rows() == b.rows());
    const std::size_t n = a.rows();
    const std::size_t c = b.cols();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
        if (pivot != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(pivot, j));
        if (pivot != k)
            for (std::size_t j = 0; j < c; ++j) std::swap(b(k, j), b(pivot, j));
        REQUIRE(std::abs(a(k, k)) > 0.0);
        const double inv = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) * inv;
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < c; ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        const double inv = 1.0 / a(k, k);
        for (std::size_t j = 0; j < c; ++j) b(k, j) *= inv;
        for (std::size_t i = 0; i < k; ++i) {
            const double f = a(i, k);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < c; ++j) b(i, j) -= f * b(k, j);
        }
    }
    return b;
}

// Ridge solution (K^T K + lambda I)^{-1} K^T E via the elimination oracle.
inline bscrls::Matrix gauss_ridge(const bscrls::Matrix& k, const bscrls::Matrix& e,
                                  double lambda) {
    bscrls::Matrix g = loop_matmul(k.transposed(), k);
    for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) += lambda;
    return gauss_solve(std::move(g), loop_matmul(k.transposed(), e));
}

// Random matrix with exact rank r, built as an outer product of two factors.
inline bscrls::Matrix random_rank_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols,
                                         std::size_t rank) {
    return loop_matmul(random_matrix(seed, rows, rank), random_matrix(seed + 1, rank, cols));
}

} // namespace test_support
