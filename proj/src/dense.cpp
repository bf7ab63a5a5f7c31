#include "stgemm/dense.hpp"

#include "stgemm/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

namespace stgemm {

TernaryDense::TernaryDense(std::size_t rows, std::size_t cols)
    : rows(rows), cols(cols), values(rows * cols, 0) {
    if (rows == 0 || cols == 0)
        throw ParameterError("ternary matrix needs K >= 1 and N >= 1");
}

TernaryDense::TernaryDense(std::size_t rows, std::size_t cols, std::vector<std::int8_t> vals)
    : rows(rows), cols(cols), values(std::move(vals)) {
    if (rows == 0 || cols == 0)
        throw ParameterError("ternary matrix needs K >= 1 and N >= 1");
    if (values.size() != rows * cols)
        throw ParameterError("ternary matrix value count does not match K*N");
    for (auto v : values)
        if (v < -1 || v > 1)
            throw ParameterError("ternary matrix entry outside {-1, 0, +1}");
}

std::size_t TernaryDense::nnz() const {
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](std::int8_t v) { return v != 0; }));
}

std::size_t TernaryDense::column_nnz(std::size_t c) const {
    std::size_t count = 0;
    for (std::size_t r = 0; r < rows; ++r)
        count += (*this)(r, c) != 0;
    return count;
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<float> vals)
    : rows(rows), cols(cols), values(std::move(vals)) {
    if (values.size() != rows * cols)
        throw ParameterError("dense matrix value count does not match rows*cols");
    for (float v : values)
        if (!std::isfinite(v))
            throw ParameterError("dense matrix contains a non-finite value");
}

SparsityLevel::SparsityLevel(std::uint32_t num, std::uint32_t den) : num(num), den(den) {
    if (den == 0 || num == 0 || num > den)
        throw ParameterError("sparsity must lie in (0, 1], got " + std::to_string(num) + "/" +
                             std::to_string(den));
}

std::size_t SparsityLevel::nonzeros_per_column(std::size_t k) const {
    // floor((2*num*K + den) / (2*den)) == round(num*K/den) with halves rounded up
    const std::uint64_t twice = 2ull * num * k + den;
    return static_cast<std::size_t>(twice / (2ull * den));
}

SparsityLevel SparsityLevel::parse(const std::string &text) {
    auto parse_uint = [&](std::string_view part) {
        std::uint32_t out = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty())
            throw ParameterError("cannot parse sparsity '" + text + "', expected num/den");
        return out;
    };
    std::string_view view(text);
    auto slash = view.find('/');
    if (slash == std::string_view::npos)
        return {parse_uint(view), 1};
    return {parse_uint(view.substr(0, slash)), parse_uint(view.substr(slash + 1))};
}

std::string SparsityLevel::to_string() const {
    return std::to_string(num) + "/" + std::to_string(den);
}

std::vector<SparsityLevel> paper_sparsities() { return {{1, 2}, {1, 4}, {1, 8}, {1, 16}}; }

TernaryDense gen_ternary(std::size_t k, std::size_t n, SparsityLevel s, std::uint64_t seed) {
    if (s.den == 0 || s.num == 0 || s.num > s.den)
        throw ParameterError("sparsity must lie in (0, 1]");
    TernaryDense w(k, n);
    const std::size_t nz = s.nonzeros_per_column(k);
    const std::size_t n_pos = (nz + 1) / 2;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> rows(k);
    for (std::size_t c = 0; c < n; ++c) {
        // partial Fisher-Yates: the first nz slots become a uniform sample without replacement
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        for (std::size_t i = 0; i < nz; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, k - 1);
            std::swap(rows[i], rows[pick(rng)]);
        }
        for (std::size_t i = 0; i < nz; ++i)
            w(rows[i], c) = i < n_pos ? 1 : -1;
    }
    return w;
}

DenseMatrix gen_input(std::size_t m, std::size_t k, std::uint64_t seed, int int_range) {
    if (int_range < 1)
        throw ParameterError("int_range must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(-int_range, int_range);
    DenseMatrix x(m, k);
    for (auto &v : x.values)
        v = static_cast<float>(dist(rng));
    return x;
}

DenseMatrix gen_input_real(std::size_t m, std::size_t k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    DenseMatrix x(m, k);
    for (auto &v : x.values)
        v = dist(rng);
    return x;
}

BiasVector gen_bias(std::size_t n, std::uint64_t seed, int int_range) {
    auto row = gen_input(1, n, seed, int_range);
    return std::move(row.values);
}

DenseMatrix oracle_gemm(const DenseMatrix &x, const TernaryDense &w, std::span<const float> bias,
                        std::optional<float> alpha) {
    if (x.cols != w.rows)
        throw ParameterError("X has " + std::to_string(x.cols) + " columns but W has " +
                             std::to_string(w.rows) + " rows");
    if (bias.size() != w.cols)
        throw ParameterError("bias length " + std::to_string(bias.size()) +
                             " does not match N = " + std::to_string(w.cols));
    DenseMatrix y(x.rows, w.cols);
    for (std::size_t m = 0; m < x.rows; ++m) {
        for (std::size_t n = 0; n < w.cols; ++n) {
            float acc = bias[n];
            for (std::size_t k = 0; k < w.rows; ++k) {
                const auto v = w(k, n);
                if (v > 0)
                    acc += x(m, k);
                else if (v < 0)
                    acc -= x(m, k);
            }
            y(m, n) = alpha ? prelu(acc, *alpha) : acc;
        }
    }
    return y;
}

} // namespace stgemm
