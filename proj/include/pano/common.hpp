#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Contract checks. PANO_REQUIRE guards caller-facing preconditions,
// PANO_ASSERT guards internal invariants that must not fail for any input.
#define PANO_REQUIRE(cond, msg)                                      \
    do {                                                             \
        if (!(cond)) {                                               \
            throw std::invalid_argument(std::string("pano: ") + msg); \
        }                                                            \
    } while (0)

#define PANO_ASSERT(cond, msg)                                      \
    do {                                                            \
        if (!(cond)) {                                              \
            throw std::runtime_error(std::string("pano: ") + msg);  \
        }                                                           \
    } while (0)

namespace pano {

using idx_t = std::int64_t;

/// Dense row-major float matrix. The common carrier for datasets and
/// transform matrices throughout the library.
struct MatrixF {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> values;

    MatrixF() = default;
    MatrixF(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0f) {}

    std::span<const float> row(std::size_t i) const {
        return {values.data() + i * cols, cols};
    }
    std::span<float> row(std::size_t i) {
        return {values.data() + i * cols, cols};
    }
    float& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    float at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    bool operator==(const MatrixF& o) const = default;
};

/// Wide-precision counterpart used by the transform learner and analytic
/// oracles; published artifacts downcast to MatrixF.
struct MatrixD {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    MatrixD() = default;
    MatrixD(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * cols, cols};
    }
    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    MatrixF to_float() const {
        MatrixF out(rows, cols);
        for (std::size_t i = 0; i < values.size(); ++i) {
            out.values[i] = static_cast<float>(values[i]);
        }
        return out;
    }
    static MatrixD from_float(const MatrixF& m) {
        MatrixD out(m.rows, m.cols);
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            out.values[i] = static_cast<double>(m.values[i]);
        }
        return out;
    }
    static MatrixD identity(std::size_t n) {
        MatrixD out(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            out.at(i, i) = 1.0;
        }
        return out;
    }
};

}  // namespace pano
