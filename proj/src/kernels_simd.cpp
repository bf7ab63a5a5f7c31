#include "stgemm/simd.hpp"

#include "scalar_detail.hpp"
#include "stgemm/error.hpp"
#include "vec4.hpp"

#include <algorithm>
#include <array>

namespace stgemm {

PaddedInput pad_input(const DenseMatrix &x) {
    PaddedInput xp{x.rows, x.cols, std::vector<float>(x.rows * (x.cols + 1), 0.0f)};
    for (std::size_t m = 0; m < x.rows; ++m)
        std::copy_n(x.values.data() + m * x.cols, x.cols, xp.row(m));
    return xp;
}

DenseMatrix unpad(const PaddedInput &xp) {
    DenseMatrix x(xp.rows, xp.k);
    for (std::size_t m = 0; m < xp.rows; ++m)
        std::copy_n(xp.row(m), xp.k, x.values.data() + m * xp.k);
    return x;
}

bool native_simd_available() { return STGEMM_HAVE_NATIVE_VEC4 != 0; }

namespace {

using detail::PortableVec4;
using detail::Tally;

void check_simd_shapes(const PaddedInput &xp, std::size_t k, std::size_t n,
                       std::span<const float> bias) {
    if (xp.k != k)
        throw ParameterError("X has " + std::to_string(xp.k) + " columns but W has " +
                             std::to_string(k) + " rows");
    if (xp.values.size() != xp.rows * xp.stride())
        throw ParameterError("padded input storage does not match its dimensions");
    if (n % kLanes != 0)
        throw ParameterError("N must be divisible by 4 (got N = " + std::to_string(n) + ")");
    if (bias.size() != n)
        throw ParameterError("bias length " + std::to_string(bias.size()) +
                             " does not match N = " + std::to_string(n));
}

void check_symmetric(const SymmetricInterleavedTcsc &t) {
    if (t.group != 1 && t.group != 2 && t.group != 4)
        throw ParameterError("symmetric interleave group size must be 1, 2 or 4");
    if (t.col_start.size() != t.n + 1 || t.group_pairs.size() != t.n / kLanes)
        throw CorruptionError("symmetric format offsets are inconsistent");
    for (std::size_t j = 0; j < t.n; ++j) {
        const auto pairs = t.group_pairs[j / kLanes];
        if (pairs % static_cast<index_t>(kLanes) != 0 ||
            t.col_start[j + 1] - t.col_start[j] != 2 * pairs)
            throw CorruptionError("column " + std::to_string(j) +
                                  " breaks the symmetric pair count");
    }
}

/// Entry offsets of the 4 positives and 4 negatives inside one 8-entry unit of 4 pairs.
struct UnitSlots {
    std::array<std::size_t, 4> pos;
    std::array<std::size_t, 4> neg;
};

UnitSlots unit_slots(std::size_t group) {
    UnitSlots s{};
    for (std::size_t u = 0; u < 4; ++u) {
        s.pos[u] = interleaved_pos_slot(u, group);
        s.neg[u] = interleaved_neg_slot(u, group);
    }
    return s;
}

template <class V>
void finish_group(V sum, std::size_t n0, std::optional<float> alpha, float *out) {
    if (alpha)
        sum = sum.prelu(*alpha);
    sum.store(out + n0);
}

template <class V, bool Count>
DenseMatrix vertical_impl(const PaddedInput &xp, const SymmetricInterleavedTcsc &t,
                          std::span<const float> bias, std::optional<float> alpha,
                          OpCounts *counts) {
    const Tally<Count> tally{counts};
    const UnitSlots slots = unit_slots(t.group);
    DenseMatrix y(xp.rows, t.n);
    for (std::size_t m = 0; m < xp.rows; ++m) {
        const float *x = xp.row(m);
        for (std::size_t n0 = 0; n0 < t.n; n0 += kLanes) {
            const auto pairs = static_cast<std::size_t>(t.group_pairs[n0 / kLanes]);
            const index_t *c0 = t.all_indices.data() + t.col_start[n0];
            const index_t *c1 = t.all_indices.data() + t.col_start[n0 + 1];
            const index_t *c2 = t.all_indices.data() + t.col_start[n0 + 2];
            const index_t *c3 = t.all_indices.data() + t.col_start[n0 + 3];
            V pos = V::zero();
            V neg = V::zero();
            for (std::size_t e = 0; e < 2 * pairs; e += 8) {
                for (std::size_t u = 0; u < 4; ++u) {
                    const std::size_t p = e + slots.pos[u];
                    const std::size_t q = e + slots.neg[u];
                    pos = pos + V::set(x[c0[p]], x[c1[p]], x[c2[p]], x[c3[p]]);
                    neg = neg + V::set(x[c0[q]], x[c1[q]], x[c2[q]], x[c3[q]]);
                }
            }
            tally.adds(4 * 2 * pairs);
            V sum = (V::load(bias.data() + n0) + pos) - neg;
            tally.adds(8);
            if (alpha)
                tally.mults(4);
            finish_group(sum, n0, alpha, y.values.data() + m * t.n);
        }
    }
    return y;
}

template <class V, bool Count>
DenseMatrix horizontal_impl(const PaddedInput &xp, const SymmetricInterleavedTcsc &t,
                            std::span<const float> bias, std::optional<float> alpha,
                            OpCounts *counts) {
    const Tally<Count> tally{counts};
    const UnitSlots slots = unit_slots(t.group);
    DenseMatrix y(xp.rows, t.n);
    for (std::size_t m = 0; m < xp.rows; ++m) {
        const float *x = xp.row(m);
        for (std::size_t n0 = 0; n0 < t.n; n0 += kLanes) {
            const auto pairs = static_cast<std::size_t>(t.group_pairs[n0 / kLanes]);
            std::array<float, 4> col_sums{};
            for (std::size_t c = 0; c < kLanes; ++c) {
                const index_t *col = t.all_indices.data() + t.col_start[n0 + c];
                V acc = V::zero();
                for (std::size_t e = 0; e < 2 * pairs; e += 8) {
                    const index_t *unit = col + e;
                    acc = acc + V::set(x[unit[slots.pos[0]]], x[unit[slots.pos[1]]],
                                       x[unit[slots.pos[2]]], x[unit[slots.pos[3]]]);
                    acc = acc - V::set(x[unit[slots.neg[0]]], x[unit[slots.neg[1]]],
                                       x[unit[slots.neg[2]]], x[unit[slots.neg[3]]]);
                }
                col_sums[c] = acc.hsum();
                tally.adds(2 * pairs + 3);
            }
            V sum = V::load(bias.data() + n0) + V::load(col_sums.data());
            tally.adds(4);
            if (alpha)
                tally.mults(4);
            finish_group(sum, n0, alpha, y.values.data() + m * t.n);
        }
    }
    return y;
}

template <class V, bool Count>
DenseMatrix vectorized_optimal_impl(const PaddedInput &xp, const InterleavedBlockedTcsc &t,
                                    std::span<const float> bias, std::optional<float> alpha,
                                    const GemmConfig &cfg) {
    const Tally<Count> tally{cfg.counts};
    const std::size_t uf = cfg.inner_unroll;
    const std::size_t g = t.group;
    const auto tile_sums = detail::select_sum(kLanes, uf, Count);
    const auto row_sums = detail::select_sum(1, uf, Count);
    const auto row_pairs = detail::select_pairs(1, g, Count);

    DenseMatrix y(xp.rows, t.n);
    for (std::size_t m = 0; m < xp.rows; ++m)
        std::copy(bias.begin(), bias.end(), y.values.begin() + m * t.n);

    const std::size_t full_rows = xp.rows / kLanes * kLanes;
    for (std::size_t b = 0; b < t.num_blocks(); ++b) {
        for (std::size_t m0 = 0; m0 < full_rows; m0 += kLanes) {
            const std::array<const float *, 4> rows{xp.row(m0), xp.row(m0 + 1), xp.row(m0 + 2),
                                                    xp.row(m0 + 3)};
            auto gather = [&](index_t k) {
                return V::set(rows[0][k], rows[1][k], rows[2][k], rows[3][k]);
            };
            float pos[4];
            float neg[4];
            for (std::size_t n0 = 0; n0 < t.n; n0 += kLanes) {
                for (std::size_t n = n0; n < n0 + kLanes; ++n) {
                    const auto seg = t.segments(b, n);
                    V acc = V::zero();
                    const index_t *inter = seg.interleaved.data();
                    for (std::size_t i = 0; i < seg.interleaved.size(); i += 2 * g) {
                        for (std::size_t u = 0; u < g; ++u)
                            acc = acc + gather(inter[i + u]);
                        for (std::size_t u = 0; u < g; ++u)
                            acc = acc - gather(inter[i + g + u]);
                    }
                    tally.adds(4 * seg.interleaved.size());
                    tile_sums(rows.data(), seg.positives.data(), seg.positives.size(), pos, uf,
                              cfg.counts);
                    tile_sums(rows.data(), seg.negatives.data(), seg.negatives.size(), neg, uf,
                              cfg.counts);
                    V current = V::set(y(m0, n), y(m0 + 1, n), y(m0 + 2, n), y(m0 + 3, n));
                    std::array<float, 4> lanes{};
                    (current + acc).store(lanes.data());
                    for (std::size_t r = 0; r < kLanes; ++r)
                        y(m0 + r, n) = lanes[r] + (pos[r] - neg[r]);
                    tally.adds(4 + 2 * kLanes);
                }
            }
        }
        // leftover rows: the scalar three-phase update
        for (std::size_t m = full_rows; m < xp.rows; ++m) {
            const float *row = xp.row(m);
            float inter = 0.0f;
            float pos = 0.0f;
            float neg = 0.0f;
            for (std::size_t n = 0; n < t.n; ++n) {
                const auto seg = t.segments(b, n);
                row_pairs(&row, seg.interleaved.data(), seg.interleaved.size(), &inter, g,
                          cfg.counts);
                row_sums(&row, seg.positives.data(), seg.positives.size(), &pos, uf, cfg.counts);
                row_sums(&row, seg.negatives.data(), seg.negatives.size(), &neg, uf, cfg.counts);
                y(m, n) += (inter + pos) - neg;
                tally.adds(3);
            }
        }
    }

    if (alpha) {
        for (std::size_t m = 0; m < xp.rows; ++m) {
            float *out = y.values.data() + m * t.n;
            for (std::size_t n0 = 0; n0 < t.n; n0 += kLanes)
                V::load(out + n0).prelu(*alpha).store(out + n0);
        }
        tally.mults(xp.rows * t.n);
    }
    return y;
}

template <template <class, bool> class Impl, class... Args>
DenseMatrix run_path(SimdPath path, bool count, Args &&...args) {
#if STGEMM_HAVE_NATIVE_VEC4
    if (path == SimdPath::Native)
        return count ? Impl<detail::NativeVec4, true>::run(args...)
                     : Impl<detail::NativeVec4, false>::run(args...);
#else
    (void)path;
#endif
    return count ? Impl<PortableVec4, true>::run(args...)
                 : Impl<PortableVec4, false>::run(args...);
}

template <class V, bool Count>
struct Vertical {
    static DenseMatrix run(const PaddedInput &xp, const SymmetricInterleavedTcsc &t,
                           std::span<const float> bias, std::optional<float> alpha,
                           OpCounts *counts) {
        return vertical_impl<V, Count>(xp, t, bias, alpha, counts);
    }
};

template <class V, bool Count>
struct Horizontal {
    static DenseMatrix run(const PaddedInput &xp, const SymmetricInterleavedTcsc &t,
                           std::span<const float> bias, std::optional<float> alpha,
                           OpCounts *counts) {
        return horizontal_impl<V, Count>(xp, t, bias, alpha, counts);
    }
};

template <class V, bool Count>
struct VectorizedOptimal {
    static DenseMatrix run(const PaddedInput &xp, const InterleavedBlockedTcsc &t,
                           std::span<const float> bias, std::optional<float> alpha,
                           const GemmConfig &cfg) {
        return vectorized_optimal_impl<V, Count>(xp, t, bias, alpha, cfg);
    }
};

} // namespace

DenseMatrix gemm_vertical(const PaddedInput &xp, const SymmetricInterleavedTcsc &t,
                          std::span<const float> bias, std::optional<float> alpha,
                          const SimdOptions &opts) {
    check_simd_shapes(xp, t.k, t.n, bias);
    check_symmetric(t);
    return run_path<Vertical>(opts.path, opts.counts != nullptr, xp, t, bias, alpha,
                              opts.counts);
}

DenseMatrix gemm_horizontal(const PaddedInput &xp, const SymmetricInterleavedTcsc &t,
                            std::span<const float> bias, std::optional<float> alpha,
                            const SimdOptions &opts) {
    check_simd_shapes(xp, t.k, t.n, bias);
    check_symmetric(t);
    return run_path<Horizontal>(opts.path, opts.counts != nullptr, xp, t, bias, alpha,
                                opts.counts);
}

DenseMatrix gemm_vectorized_optimal(const PaddedInput &xp, const InterleavedBlockedTcsc &t,
                                    std::span<const float> bias, std::optional<float> alpha,
                                    const GemmConfig &cfg, SimdPath path) {
    check_simd_shapes(xp, t.k, t.n, bias);
    cfg.validate();
    if (t.group == 0 || t.block_size == 0)
        throw ParameterError("interleaved-blocked format has zero group or block size");
    return run_path<VectorizedOptimal>(path, cfg.counts != nullptr, xp, t, bias, alpha, cfg);
}

} // namespace stgemm
