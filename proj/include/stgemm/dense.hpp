#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stgemm {

/// Dense K x N matrix over {-1, 0, +1}, row-major signed bytes.
struct TernaryDense {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int8_t> values;

    TernaryDense() = default;
    /// All-zero matrix. Throws ParameterError unless rows, cols >= 1.
    TernaryDense(std::size_t rows, std::size_t cols);
    /// Takes ownership of `values`; checks length and that every entry is ternary.
    TernaryDense(std::size_t rows, std::size_t cols, std::vector<std::int8_t> values);

    std::int8_t operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    std::int8_t &operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }

    std::size_t nnz() const;
    std::size_t column_nnz(std::size_t c) const;

    friend bool operator==(const TernaryDense &, const TernaryDense &) = default;
};

/// Row-major matrix of 32-bit floats. Used for X (M x K) and Y (M x N).
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> values;

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
        : rows(rows), cols(cols), values(rows * cols, fill) {}
    /// Checks length and finiteness.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<float> values);

    float operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    float &operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }

    std::span<const float> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
    std::span<float> row(std::size_t r) { return {values.data() + r * cols, cols}; }

    friend bool operator==(const DenseMatrix &, const DenseMatrix &) = default;
};

/// Length-N bias, broadcast-added to each row of the product.
using BiasVector = std::vector<float>;

/// Fraction of nonzero entries in W, held as an exact rational.
struct SparsityLevel {
    std::uint32_t num = 1;
    std::uint32_t den = 4;

    SparsityLevel() = default;
    /// Throws ParameterError unless 0 < num/den <= 1.
    SparsityLevel(std::uint32_t num, std::uint32_t den);

    double value() const { return static_cast<double>(num) / den; }
    /// round(s * K), ties away from zero, computed exactly.
    std::size_t nonzeros_per_column(std::size_t k) const;
    /// Accepts "num/den" or a bare integer ("1" means s = 1).
    static SparsityLevel parse(const std::string &text);
    std::string to_string() const;

    friend bool operator==(const SparsityLevel &, const SparsityLevel &) = default;
};

/// The four sparsities the benchmark sweeps use: 1/2, 1/4, 1/8, 1/16.
std::vector<SparsityLevel> paper_sparsities();

/// Random ternary matrix with exactly round(s*K) nonzeros per column, ceil(nz/2) of them +1
/// and floor(nz/2) of them -1, at distinct uniformly chosen rows. Deterministic per seed.
TernaryDense gen_ternary(std::size_t k, std::size_t n, SparsityLevel s, std::uint64_t seed);

/// M x K matrix of integers drawn uniformly from [-int_range, int_range], stored as floats.
DenseMatrix gen_input(std::size_t m, std::size_t k, std::uint64_t seed, int int_range = 8);

/// M x K matrix of reals drawn uniformly from [-1, 1).
DenseMatrix gen_input_real(std::size_t m, std::size_t k, std::uint64_t seed);

/// Bias with integer entries in [-int_range, int_range].
BiasVector gen_bias(std::size_t n, std::uint64_t seed, int int_range = 8);

inline float prelu(float v, float alpha) { return v > 0.0f ? v : alpha * v; }

/// Reference Y = XW + b, optionally followed by PReLU. Walks W densely in k order using
/// only additions and subtractions.
DenseMatrix oracle_gemm(const DenseMatrix &x, const TernaryDense &w, std::span<const float> bias,
                        std::optional<float> alpha = std::nullopt);

} // namespace stgemm
