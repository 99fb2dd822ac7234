#include "doctest.h"

#include <limits>

#include "bscrls/decomposition.hpp"
#include "bscrls/matrix.hpp"
#include "test_support.hpp"

using namespace bscrls;
namespace ts = test_support;

TEST_CASE("frobenius norm basics") {
    CHECK(frobenius_norm(Matrix(1, 2, {3.0, 4.0})) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(frobenius_norm(Matrix(4, 4)) == 0.0);

    Matrix a = ts::random_matrix(42, 20, 7);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) sum += a(i, j) * a(i, j);
    CHECK(std::abs(frobenius_norm(a) - std::sqrt(sum)) < 1e-12);
}

TEST_CASE("spectral norm matches known values and the power-iteration oracle") {
    CHECK(spectral_norm(Matrix::identity(5)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectral_norm(Matrix(2, 2, {3.0, 0.0, 0.0, 1.0})) == doctest::Approx(3.0).epsilon(1e-12));

    Matrix a = ts::random_matrix(7, 30, 10);
    const double expected = ts::power_iteration_spectral_norm(a);
    CHECK(std::abs(spectral_norm(a) - expected) / expected < 1e-8);
}

TEST_CASE("spectral norm never exceeds the frobenius norm") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Matrix a = ts::random_matrix(seed, 3 + seed % 9, 2 + seed % 7);
        CHECK(spectral_norm(a) <= frobenius_norm(a) + 1e-10);
    }
    // Equality for rank-1 matrices.
    for (std::uint64_t seed = 100; seed < 105; ++seed) {
        Matrix a = ts::random_rank_matrix(seed, 6, 4, 1);
        CHECK(std::abs(spectral_norm(a) - frobenius_norm(a)) < 1e-10);
    }
}

TEST_CASE("svd factors reconstruct the input and are orthonormal") {
    auto check_factors = [](const Matrix& a) {
        const SvdFactors f = svd(a);
        const std::size_t r = f.singular_values.size();
        REQUIRE(r == std::min(a.rows(), a.cols()));
        for (std::size_t i = 0; i + 1 < r; ++i)
            CHECK(f.singular_values[i] >= f.singular_values[i + 1]);
        for (double s : f.singular_values) CHECK(s >= 0.0);

        Matrix scaled = f.u;
        for (std::size_t i = 0; i < scaled.rows(); ++i)
            for (std::size_t j = 0; j < r; ++j) scaled(i, j) *= f.singular_values[j];
        const double rel = ts::frob_diff(ts::loop_matmul(scaled, f.vt), a) /
                           std::max(frobenius_norm(a), 1e-300);
        CHECK(rel < 1e-10);

        Matrix utu = ts::loop_matmul(f.u.transposed(), f.u);
        Matrix vvt = ts::loop_matmul(f.vt, f.vt.transposed());
        CHECK(ts::max_abs_diff(utu, Matrix::identity(r)) < 1e-10);
        CHECK(ts::max_abs_diff(vvt, Matrix::identity(r)) < 1e-10);
    };
    check_factors(ts::random_matrix(3, 12, 5));
    check_factors(ts::random_matrix(4, 5, 12));
    check_factors(ts::random_rank_matrix(5, 10, 8, 3));  // rank deficient
}

TEST_CASE("pseudo inverse on simple shapes") {
    CHECK(ts::max_abs_diff(pseudo_inverse(Matrix::identity(3)), Matrix::identity(3)) < 1e-12);

    // Column vector: least squares of the normal equations.
    Matrix column(2, 1, {1.0, 1.0});
    Matrix expected(1, 2, {0.5, 0.5});
    CHECK(ts::max_abs_diff(pseudo_inverse(column), expected) < 1e-12);

    // An orthogonal projector is its own pseudo-inverse.
    Matrix projector(2, 2, {1.0, 0.0, 0.0, 0.0});
    CHECK(ts::max_abs_diff(pseudo_inverse(projector), projector) < 1e-12);
}

TEST_CASE("penrose conditions hold for mixed-rank random matrices") {
    for (std::uint64_t t = 0; t < 30; ++t) {
        const std::size_t rows = 2 + (t * 7) % 49;
        const std::size_t cols = 2 + (t * 5) % 29;
        const std::size_t rank = 1 + t % std::min(rows, cols);
        Matrix a = t % 3 == 0 ? ts::random_rank_matrix(t, rows, cols, rank)
                              : ts::random_matrix(t, rows, cols);
        Matrix p = pseudo_inverse(a);

        const double scale_a = std::max(frobenius_norm(a), 1e-300);
        const double scale_p = std::max(frobenius_norm(p), 1e-300);
        Matrix ap = ts::loop_matmul(a, p);
        Matrix pa = ts::loop_matmul(p, a);
        CHECK(ts::frob_diff(ts::loop_matmul(ap, a), a) / scale_a < 1e-8);
        CHECK(ts::frob_diff(ts::loop_matmul(pa, p), p) / scale_p < 1e-8);
        CHECK(ts::frob_diff(ap.transposed(), ap) / std::max(frobenius_norm(ap), 1e-300) < 1e-8);
        CHECK(ts::frob_diff(pa.transposed(), pa) / std::max(frobenius_norm(pa), 1e-300) < 1e-8);
    }
}

TEST_CASE("pseudo inverse truncation treats small singular values as zero") {
    // Exact rank-1 matrix plus an explicit generous tolerance: the result must
    // match the rank-1 inverse regardless of roundoff in the second value.
    Matrix a = ts::random_rank_matrix(11, 6, 4, 1);
    Matrix p_auto = pseudo_inverse(a);
    Matrix p_tol = pseudo_inverse(a, 1e-6 * spectral_norm(a));
    CHECK(ts::max_abs_diff(p_auto, p_tol) < 1e-10);
    CHECK_THROWS_AS(pseudo_inverse(a, -1.0), std::invalid_argument);
}

TEST_CASE("ridge solve") {
    SUBCASE("identity design") {
        Matrix e(2, 1, {1.0, 0.0});
        Matrix w = ridge_solve(Matrix::identity(2), e, 1e-8);
        CHECK(std::abs(w(0, 0) - 1.0) < 1e-7);
        CHECK(std::abs(w(1, 0)) < 1e-7);
    }
    SUBCASE("zero design gives zero weights") {
        Matrix w = ridge_solve(Matrix(5, 3), ts::random_matrix(1, 5, 2), 1e-8);
        CHECK(frobenius_norm(w) == 0.0);
    }
    SUBCASE("matches the elimination oracle") {
        Matrix k = ts::random_matrix(21, 40, 8);
        Matrix e = ts::random_matrix(22, 40, 2);
        Matrix expected = ts::gauss_ridge(k, e, 1e-8);
        CHECK(ts::max_abs_diff(ridge_solve(k, e, 1e-8), expected) < 1e-9);
    }
    SUBCASE("agrees with the pseudo-inverse for vanishing lambda") {
        Matrix k = ts::random_matrix(31, 25, 6);  // full column rank a.s.
        Matrix e = ts::random_matrix(32, 25, 3);
        Matrix via_ridge = ridge_solve(k, e, 1e-12);
        Matrix via_pinv = pseudo_inverse(k) * e;
        CHECK(ts::max_abs_diff(via_ridge, via_pinv) < 1e-6);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(ridge_solve(Matrix(3, 2), Matrix(4, 1), 1e-8), std::invalid_argument);
        CHECK_THROWS_AS(ridge_solve(Matrix(3, 2), Matrix(3, 1), 0.0), std::invalid_argument);
    }
}

TEST_CASE("projector complement norm is zero or one") {
    CHECK(projector_complement_norm(Matrix::identity(4)) == doctest::Approx(0.0).epsilon(1e-8));

    // Tall full-column-rank: rank < rows, so the complement has norm one.
    Matrix tall = ts::random_matrix(51, 4, 2);
    const double pcn = projector_complement_norm(tall);
    CHECK(std::abs(pcn - 1.0) < 1e-8);
    // Cross-check with power iteration on the symmetric complement.
    Matrix complement = Matrix::identity(4) - ts::loop_matmul(tall, pseudo_inverse(tall));
    CHECK(std::abs(ts::power_iteration_spectral_norm(complement) - pcn) < 1e-8);

    // Wide full-row-rank: K K^+ is the identity.
    Matrix wide = ts::random_matrix(52, 3, 5);
    Matrix kkp = ts::loop_matmul(wide, pseudo_inverse(wide));
    CHECK(ts::max_abs_diff(kkp, Matrix::identity(3)) < 1e-8);
    CHECK(projector_complement_norm(wide) < 1e-8);

    // Always lands on {0, 1} up to roundoff.
    for (std::uint64_t seed = 60; seed < 72; ++seed) {
        Matrix k = ts::random_matrix(seed, 3 + seed % 6, 2 + seed % 5);
        const double v = projector_complement_norm(k);
        CHECK(std::min(std::abs(v), std::abs(v - 1.0)) < 1e-8);
    }
}
