#pragma once

// Dense row-major matrix of doubles. This is the single carrier type for
// samples, targets, node matrices, weights and residuals throughout the
// library. Shape mismatches throw std::invalid_argument.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bscrls {

class Matrix {
public:
    // 0x0 placeholder; only meaningful as an assignment target.
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("Matrix: dimensions must be positive");
    }

    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values)
        : Matrix(rows, cols) {
        if (values.size() != data_.size())
            throw std::invalid_argument("Matrix: initializer size does not match shape");
        std::copy(values.begin(), values.end(), data_.begin());
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix& operator+=(const Matrix& other) {
        require_same_shape(other, "operator+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return *this;
    }

    Matrix& operator-=(const Matrix& other) {
        require_same_shape(other, "operator-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    void require_same_shape(const Matrix& other, const char* op) const {
        if (rows_ != other.rows_ || cols_ != other.cols_)
            throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(Matrix a, double s) { return a *= s; }
inline Matrix operator*(double s, Matrix a) { return a *= s; }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data() + k * b.cols();
            double* crow = c.data() + i * c.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

// Column-wise concatenation in the given order; all parts must share a row count.
inline Matrix concat_columns(std::span<const Matrix> parts) {
    if (parts.empty())
        throw std::invalid_argument("concat_columns: no parts");
    const std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (const Matrix& p : parts) {
        if (p.rows() != rows)
            throw std::invalid_argument("concat_columns: row counts differ");
        cols += p.cols();
    }
    Matrix out(rows, cols);
    std::size_t offset = 0;
    for (const Matrix& p : parts) {
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < p.cols(); ++j)
                out(i, offset + j) = p(i, j);
        offset += p.cols();
    }
    return out;
}

inline Matrix concat_columns(std::initializer_list<Matrix> parts) {
    std::vector<Matrix> v(parts);
    return concat_columns(std::span<const Matrix>(v));
}

inline Matrix concat_rows(std::span<const Matrix> parts) {
    if (parts.empty())
        throw std::invalid_argument("concat_rows: no parts");
    const std::size_t cols = parts.front().cols();
    std::size_t rows = 0;
    for (const Matrix& p : parts) {
        if (p.cols() != cols)
            throw std::invalid_argument("concat_rows: column counts differ");
        rows += p.rows();
    }
    Matrix out(rows, cols);
    std::size_t offset = 0;
    for (const Matrix& p : parts) {
        for (std::size_t i = 0; i < p.rows(); ++i)
            for (std::size_t j = 0; j < cols; ++j)
                out(offset + i, j) = p(i, j);
        offset += p.rows();
    }
    return out;
}

inline Matrix concat_rows(std::initializer_list<Matrix> parts) {
    std::vector<Matrix> v(parts);
    return concat_rows(std::span<const Matrix>(v));
}

// Entrywise L2 norm (square root of the sum of squared entries).
inline double frobenius_norm(const Matrix& a) {
    double sum = 0.0;
    const double* p = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) sum += p[i] * p[i];
    return std::sqrt(sum);
}

} // namespace bscrls
