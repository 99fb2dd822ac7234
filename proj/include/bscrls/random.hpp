#pragma once

// Seeded uniform parameter generation. The engine is std::mt19937_64 with a
// hand-rolled [low, high) mapping so identical seeds yield identical draw
// sequences on every platform. One engine word is consumed per value; the
// cursor counts consumed words and a stream can be rebuilt at any cursor.

#include <cstdint>
#include <random>
#include <stdexcept>

#include "bscrls/matrix.hpp"

namespace bscrls {

struct RandomSpec {
    std::uint64_t seed = 0;
    double low = -1.0;
    double high = 1.0;
};

class RandomStream {
public:
    explicit RandomStream(const RandomSpec& spec) : spec_(spec), engine_(spec.seed) {
        if (!(spec.low < spec.high))
            throw std::invalid_argument("RandomSpec: low must be less than high");
    }

    RandomStream(const RandomSpec& spec, std::uint64_t cursor) : RandomStream(spec) {
        engine_.discard(cursor);
        cursor_ = cursor;
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_unit() {
        ++cursor_;
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [low, high).
    double next() { return spec_.low + (spec_.high - spec_.low) * next_unit(); }

    Matrix draw(std::size_t rows, std::size_t cols) {
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) m(i, j) = next();
        return m;
    }

    std::uint64_t cursor() const { return cursor_; }
    const RandomSpec& spec() const { return spec_; }

private:
    RandomSpec spec_;
    std::mt19937_64 engine_;
    std::uint64_t cursor_ = 0;
};

// Draws a matrix from a fresh stream; repeated calls with the same spec
// produce the same matrix.
inline Matrix draw_uniform(const RandomSpec& spec, std::size_t rows, std::size_t cols) {
    RandomStream stream(spec);
    return stream.draw(rows, cols);
}

} // namespace bscrls
