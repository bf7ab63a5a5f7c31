#pragma once

// Building blocks shared by the scalar kernels and the scalar cleanup of the vectorized ones.

#include "stgemm/kernels.hpp"

#include <cstddef>
#include <vector>

namespace stgemm::detail {

template <bool Enabled>
struct Tally {
    OpCounts *sink = nullptr;
    void adds(std::uint64_t n) const {
        if constexpr (Enabled)
            sink->adds += n;
    }
    void mults(std::uint64_t n) const {
        if constexpr (Enabled)
            sink->mults += n;
    }
};

/// out[r] = sum over `idx` of rows[r][idx[i]], for `MR` rows of X at once.
/// `UF` accumulators per row; UF == 0 takes the count from `uf` at run time.
template <std::size_t MR, std::size_t UF, bool Count>
void run_sums(const float *const *rows, const index_t *idx, std::size_t len, float *out,
              std::size_t uf, OpCounts *counts) {
    if constexpr (UF != 0) {
        float acc[MR][UF] = {};
        std::size_t i = 0;
        for (; i + UF <= len; i += UF)
            for (std::size_t u = 0; u < UF; ++u) {
                const auto k = idx[i + u];
                for (std::size_t r = 0; r < MR; ++r)
                    acc[r][u] += rows[r][k];
            }
        for (; i < len; ++i)
            for (std::size_t r = 0; r < MR; ++r)
                acc[r][0] += rows[r][idx[i]];
        for (std::size_t r = 0; r < MR; ++r) {
            float s = acc[r][0];
            for (std::size_t u = 1; u < UF; ++u)
                s += acc[r][u];
            out[r] = s;
        }
        Tally<Count>{counts}.adds(MR * len + MR * (UF - 1));
    } else {
        std::vector<float> acc(MR * uf, 0.0f);
        std::size_t i = 0;
        for (; i + uf <= len; i += uf)
            for (std::size_t u = 0; u < uf; ++u) {
                const auto k = idx[i + u];
                for (std::size_t r = 0; r < MR; ++r)
                    acc[r * uf + u] += rows[r][k];
            }
        for (; i < len; ++i)
            for (std::size_t r = 0; r < MR; ++r)
                acc[r * uf] += rows[r][idx[i]];
        for (std::size_t r = 0; r < MR; ++r) {
            float s = acc[r * uf];
            for (std::size_t u = 1; u < uf; ++u)
                s += acc[r * uf + u];
            out[r] = s;
        }
        Tally<Count>{counts}.adds(MR * len + MR * (uf - 1));
    }
}

/// out[r] = sum of the interleaved segment for MR rows: runs of `G` positives followed by
/// `G` negatives, one accumulator per run slot. G == 0 reads the group size from `g`.
template <std::size_t MR, std::size_t G, bool Count>
void run_pairs(const float *const *rows, const index_t *seg, std::size_t len, float *out,
               std::size_t g, OpCounts *counts) {
    constexpr std::size_t kSlots = G == 0 ? 1 : G;
    const std::size_t group = G == 0 ? g : G;
    float acc[MR][kSlots] = {};
    for (std::size_t i = 0; i < len; i += 2 * group) {
        for (std::size_t u = 0; u < group; ++u) {
            const auto kp = seg[i + u];
            const auto kn = seg[i + group + u];
            for (std::size_t r = 0; r < MR; ++r) {
                acc[r][u % kSlots] += rows[r][kp];
                acc[r][u % kSlots] -= rows[r][kn];
            }
        }
    }
    for (std::size_t r = 0; r < MR; ++r) {
        float s = acc[r][0];
        for (std::size_t u = 1; u < kSlots; ++u)
            s += acc[r][u];
        out[r] = s;
    }
    Tally<Count>{counts}.adds(MR * len + MR * (kSlots - 1));
}

using SumFn = void (*)(const float *const *, const index_t *, std::size_t, float *, std::size_t,
                       OpCounts *);

/// Specialized instances exist for UF in {1, 2, 4, 8, 12, 16}; other factors use the
/// run-time path. MR must be 1, 2 or 4.
SumFn select_sum(std::size_t mr, std::size_t uf, bool count);

/// Specialized for G in {1, 2, 4, 8}.
SumFn select_pairs(std::size_t mr, std::size_t g, bool count);

void check_shapes(const DenseMatrix &x, std::size_t k, std::size_t n,
                  std::span<const float> bias);

} // namespace stgemm::detail
