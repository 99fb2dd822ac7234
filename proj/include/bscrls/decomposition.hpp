#pragma once

// Dense factorizations and solvers: thin SVD by one-sided Jacobi rotations,
// the Moore-Penrose pseudo-inverse with singular-value truncation, a Cholesky
// ridge solver for the normal equations, and the induced-2-norm diagnostic for
// the complement of a node matrix's column-space projector.

#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bscrls/matrix.hpp"

namespace bscrls {

struct SvdFactors {
    Matrix u;                             // rows x r, orthonormal columns
    std::vector<double> singular_values;  // length r = min(rows, cols), non-increasing
    Matrix vt;                            // r x cols, orthonormal rows
};

namespace detail {

// One-sided Jacobi orthogonalization; requires rows >= cols. Columns of the
// working copy converge to u_j * sigma_j while v accumulates the rotations.
inline SvdFactors svd_tall(const Matrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    Matrix b = a;
    Matrix v = Matrix::identity(n);
    constexpr double rotation_tol = 1e-14;
    constexpr int max_sweeps = 60;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double bp = b(i, p), bq = b(i, q);
                    app += bp * bp;
                    aqq += bq * bq;
                    apq += bp * bq;
                }
                if (app == 0.0 || aqq == 0.0) continue;
                if (std::abs(apq) <= rotation_tol * std::sqrt(app * aqq)) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t =
                    (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double bp = b(i, p), bq = b(i, q);
                    b(i, p) = c * bp - s * bq;
                    b(i, q) = s * bp + c * bq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += b(i, j) * b(i, j);
        sigma[j] = std::sqrt(sum);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    SvdFactors f;
    f.u = Matrix(m, n);
    f.vt = Matrix(n, n);
    f.singular_values.resize(n);

    const double smax = sigma[order.front()];
    const double negligible =
        static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon() * smax;

    std::size_t completed = 0;
    for (std::size_t jj = 0; jj < n; ++jj) {
        const std::size_t src = order[jj];
        f.singular_values[jj] = sigma[src];
        for (std::size_t i = 0; i < n; ++i) f.vt(jj, i) = v(i, src);
        if (sigma[src] > negligible) {
            const double inv = 1.0 / sigma[src];
            for (std::size_t i = 0; i < m; ++i) f.u(i, jj) = b(i, src) * inv;
        } else {
            // Negligible direction: replace by a unit vector orthogonal to the
            // columns already placed, so u keeps orthonormal columns.
            for (std::size_t cand = completed; cand < m; ++cand) {
                std::vector<double> e(m, 0.0);
                e[(cand + jj) % m] = 1.0;
                for (std::size_t prev = 0; prev < jj; ++prev) {
                    double dot = 0.0;
                    for (std::size_t i = 0; i < m; ++i) dot += e[i] * f.u(i, prev);
                    for (std::size_t i = 0; i < m; ++i) e[i] -= dot * f.u(i, prev);
                }
                double nrm = 0.0;
                for (double x : e) nrm += x * x;
                nrm = std::sqrt(nrm);
                if (nrm > 1e-3) {
                    for (std::size_t i = 0; i < m; ++i) f.u(i, jj) = e[i] / nrm;
                    break;
                }
                ++completed;
            }
        }
    }
    return f;
}

} // namespace detail

inline SvdFactors svd(const Matrix& a) {
    if (a.rows() >= a.cols()) return detail::svd_tall(a);
    // a = (u s vt)^T of a^T
    SvdFactors f = detail::svd_tall(a.transposed());
    SvdFactors out;
    out.u = f.vt.transposed();
    out.vt = f.u.transposed();
    out.singular_values = std::move(f.singular_values);
    return out;
}

// Largest singular value (induced 2-norm).
inline double spectral_norm(const Matrix& a) {
    return svd(a).singular_values.front();
}

// Moore-Penrose pseudo-inverse. Singular values <= rank_tolerance are treated
// as zero; rank_tolerance == 0 selects max(rows, cols) * eps * sigma_max.
inline Matrix pseudo_inverse(const Matrix& a, double rank_tolerance = 0.0) {
    if (rank_tolerance < 0.0)
        throw std::invalid_argument("pseudo_inverse: rank_tolerance must be non-negative");
    const SvdFactors f = svd(a);
    const double smax = f.singular_values.front();
    const double cutoff =
        rank_tolerance > 0.0
            ? rank_tolerance
            : static_cast<double>(std::max(a.rows(), a.cols())) *
                  std::numeric_limits<double>::epsilon() * smax;
    Matrix p(a.cols(), a.rows());
    for (std::size_t i = 0; i < f.singular_values.size(); ++i) {
        if (!(f.singular_values[i] > cutoff)) continue;
        const double inv = 1.0 / f.singular_values[i];
        for (std::size_t r = 0; r < p.rows(); ++r) {
            const double left = f.vt(i, r) * inv;
            if (left == 0.0) continue;
            for (std::size_t c = 0; c < p.cols(); ++c) p(r, c) += left * f.u(c, i);
        }
    }
    return p;
}

// Solves (K^T K + lambda I) W = K^T E by Cholesky factorization.
inline Matrix ridge_solve(const Matrix& k, const Matrix& e, double lambda) {
    if (k.rows() != e.rows())
        throw std::invalid_argument("ridge_solve: K and E row counts differ");
    if (!(lambda > 0.0))
        throw std::invalid_argument("ridge_solve: lambda must be positive");

    const std::size_t n = k.cols();
    const std::size_t c = e.cols();

    Matrix g(n, n);
    for (std::size_t r = 0; r < k.rows(); ++r) {
        const double* row = k.data() + r * n;
        for (std::size_t i = 0; i < n; ++i) {
            const double ki = row[i];
            if (ki == 0.0) continue;
            double* grow = g.data() + i * n;
            for (std::size_t j = i; j < n; ++j) grow[j] += ki * row[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        g(i, i) += lambda;
        for (std::size_t j = i + 1; j < n; ++j) g(j, i) = g(i, j);
    }

    Matrix rhs(n, c);
    for (std::size_t r = 0; r < k.rows(); ++r) {
        const double* krow = k.data() + r * n;
        const double* erow = e.data() + r * c;
        for (std::size_t i = 0; i < n; ++i) {
            const double ki = krow[i];
            if (ki == 0.0) continue;
            double* out = rhs.data() + i * c;
            for (std::size_t j = 0; j < c; ++j) out[j] += ki * erow[j];
        }
    }

    // In-place Cholesky, lower triangle of g.
    for (std::size_t j = 0; j < n; ++j) {
        double d = g(j, j);
        for (std::size_t t = 0; t < j; ++t) d -= g(j, t) * g(j, t);
        if (!(d > 0.0))
            throw std::runtime_error("ridge_solve: normal equations not positive definite");
        const double ljj = std::sqrt(d);
        g(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = g(i, j);
            for (std::size_t t = 0; t < j; ++t) s -= g(i, t) * g(j, t);
            g(i, j) = s / ljj;
        }
    }

    // Forward then back substitution, all right-hand sides at once.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < i; ++t) {
            const double l = g(i, t);
            if (l == 0.0) continue;
            for (std::size_t j = 0; j < c; ++j) rhs(i, j) -= l * rhs(t, j);
        }
        const double inv = 1.0 / g(i, i);
        for (std::size_t j = 0; j < c; ++j) rhs(i, j) *= inv;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t t = ii + 1; t < n; ++t) {
            const double l = g(t, ii);
            if (l == 0.0) continue;
            for (std::size_t j = 0; j < c; ++j) rhs(ii, j) -= l * rhs(t, j);
        }
        const double inv = 1.0 / g(ii, ii);
        for (std::size_t j = 0; j < c; ++j) rhs(ii, j) *= inv;
    }
    return rhs;
}

// || I - K K^+ ||_2. The complement of an orthogonal projector has spectrum
// {0, 1}, so the value is 0 for full row rank and 1 otherwise; computing it
// numerically is the point of the diagnostic.
inline double projector_complement_norm(const Matrix& k) {
    Matrix p = k * pseudo_inverse(k);
    Matrix complement = Matrix::identity(k.rows()) - p;
    return spectral_norm(complement);
}

} // namespace bscrls
