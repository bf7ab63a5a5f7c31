#pragma once

#include "stgemm/dense.hpp"
#include "stgemm/formats.hpp"
#include "stgemm/kernels.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace stgemm {

/// X with one extra zero column: row stride K + 1, element [m][K] == 0. Dummy row index K in
/// the symmetric format reads that slot.
struct PaddedInput {
    std::size_t rows = 0;
    std::size_t k = 0;
    std::vector<float> values;

    std::size_t stride() const { return k + 1; }
    const float *row(std::size_t m) const { return values.data() + m * stride(); }
    float *row(std::size_t m) { return values.data() + m * stride(); }
};

PaddedInput pad_input(const DenseMatrix &x);
/// Drops the padding column.
DenseMatrix unpad(const PaddedInput &xp);

enum class SimdPath {
    /// Plain C++ 4-element arrays; available everywhere.
    Portable,
    /// SSE2 or NEON when compiled in, otherwise the portable path.
    Native,
};

bool native_simd_available();

struct SimdOptions {
    SimdPath path = SimdPath::Native;
    OpCounts *counts = nullptr;
};

/// One lane per output column of a 4-column group; positive and negative lane sums are kept
/// apart and subtracted at the end: Y = prelu((b + pos) - neg).
DenseMatrix gemm_vertical(const PaddedInput &xp, const SymmetricInterleavedTcsc &t,
                          std::span<const float> bias, std::optional<float> alpha,
                          const SimdOptions &opts = {});

/// One vector accumulator per column, reduced by a fixed-order horizontal add.
DenseMatrix gemm_horizontal(const PaddedInput &xp, const SymmetricInterleavedTcsc &t,
                            std::span<const float> bias, std::optional<float> alpha,
                            const SimdOptions &opts = {});

/// Lanes map to 4 rows of X; the interleaved segment of every (block, column) slice is
/// vectorized, leftover indices and leftover rows (M % 4) run scalar. Requires N % 4 == 0.
/// Uses cfg.inner_unroll for the scalar leftovers and cfg.counts for instrumentation.
DenseMatrix gemm_vectorized_optimal(const PaddedInput &xp, const InterleavedBlockedTcsc &t,
                                    std::span<const float> bias, std::optional<float> alpha,
                                    const GemmConfig &cfg = {},
                                    SimdPath path = SimdPath::Native);

} // namespace stgemm
