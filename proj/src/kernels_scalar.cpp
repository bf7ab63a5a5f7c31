#include "stgemm/kernels.hpp"

#include "scalar_detail.hpp"
#include "stgemm/error.hpp"

#include <algorithm>
#include <array>

namespace stgemm {

namespace {

struct VariantName {
    Variant variant;
    const char *name;
};

constexpr std::array<VariantName, 9> kVariantNames{{
    {Variant::Base, "base"},
    {Variant::Unrolled, "unrolled"},
    {Variant::Blocked, "blocked"},
    {Variant::InterleavedBlocked, "interleaved_blocked"},
    {Variant::Inverted, "inverted"},
    {Variant::Compressed, "compressed"},
    {Variant::Vertical, "vertical"},
    {Variant::Horizontal, "horizontal"},
    {Variant::VectorizedOptimal, "vectorized_optimal"},
}};

} // namespace

std::string to_string(Variant v) {
    for (const auto &entry : kVariantNames)
        if (entry.variant == v)
            return entry.name;
    return "unknown";
}

Variant parse_variant(const std::string &name) {
    for (const auto &entry : kVariantNames)
        if (name == entry.name)
            return entry.variant;
    throw ParameterError("unknown kernel variant '" + name + "'");
}

std::vector<Variant> all_variants() {
    std::vector<Variant> out;
    for (const auto &entry : kVariantNames)
        out.push_back(entry.variant);
    return out;
}

std::vector<Variant> scalar_variants() {
    return {Variant::Base,     Variant::Unrolled, Variant::Blocked, Variant::InterleavedBlocked,
            Variant::Inverted, Variant::Compressed};
}

std::vector<Variant> simd_variants() {
    return {Variant::Vertical, Variant::Horizontal, Variant::VectorizedOptimal};
}

bool is_simd(Variant v) {
    return v == Variant::Vertical || v == Variant::Horizontal || v == Variant::VectorizedOptimal;
}

void GemmConfig::validate() const {
    if (inner_unroll == 0)
        throw ParameterError("inner unroll factor must be >= 1");
    auto legal_outer = [](std::size_t v) { return v == 1 || v == 2 || v == 4; };
    if (!legal_outer(outer_rows))
        throw ParameterError("outer row unroll must be 1, 2 or 4");
    if (!legal_outer(outer_cols))
        throw ParameterError("outer column unroll must be 1, 2 or 4");
}

std::size_t GemmConfig::resolved_block_size(std::size_t k) const {
    return block_size == 0 ? default_block_size(k) : block_size;
}

std::size_t GemmConfig::resolved_group() const {
    if (group != 0)
        return group;
    return is_simd(variant) ? 2 : 4;
}

namespace detail {

namespace {

template <std::size_t MR, bool Count>
SumFn sum_for_uf(std::size_t uf) {
    switch (uf) {
    case 1: return &run_sums<MR, 1, Count>;
    case 2: return &run_sums<MR, 2, Count>;
    case 4: return &run_sums<MR, 4, Count>;
    case 8: return &run_sums<MR, 8, Count>;
    case 12: return &run_sums<MR, 12, Count>;
    case 16: return &run_sums<MR, 16, Count>;
    default: return &run_sums<MR, 0, Count>;
    }
}

template <std::size_t MR, bool Count>
SumFn pairs_for_g(std::size_t g) {
    switch (g) {
    case 1: return &run_pairs<MR, 1, Count>;
    case 2: return &run_pairs<MR, 2, Count>;
    case 4: return &run_pairs<MR, 4, Count>;
    case 8: return &run_pairs<MR, 8, Count>;
    default: return &run_pairs<MR, 0, Count>;
    }
}

template <template <std::size_t, bool> class Pick>
SumFn dispatch(std::size_t mr, std::size_t param, bool count) {
    switch (mr) {
    case 1: return count ? Pick<1, true>::get(param) : Pick<1, false>::get(param);
    case 2: return count ? Pick<2, true>::get(param) : Pick<2, false>::get(param);
    case 4: return count ? Pick<4, true>::get(param) : Pick<4, false>::get(param);
    default: throw ParameterError("outer row unroll must be 1, 2 or 4");
    }
}

template <std::size_t MR, bool Count>
struct PickSum {
    static SumFn get(std::size_t uf) { return sum_for_uf<MR, Count>(uf); }
};

template <std::size_t MR, bool Count>
struct PickPairs {
    static SumFn get(std::size_t g) { return pairs_for_g<MR, Count>(g); }
};

} // namespace

SumFn select_sum(std::size_t mr, std::size_t uf, bool count) {
    return dispatch<PickSum>(mr, uf, count);
}

SumFn select_pairs(std::size_t mr, std::size_t g, bool count) {
    return dispatch<PickPairs>(mr, g, count);
}

void check_shapes(const DenseMatrix &x, std::size_t k, std::size_t n,
                  std::span<const float> bias) {
    if (x.cols != k)
        throw ParameterError("X has " + std::to_string(x.cols) + " columns but W has " +
                             std::to_string(k) + " rows");
    if (bias.size() != n)
        throw ParameterError("bias length " + std::to_string(bias.size()) +
                             " does not match N = " + std::to_string(n));
}

} // namespace detail

using detail::SumFn;
using detail::Tally;

namespace {

std::span<const index_t> run_of(const std::vector<index_t> &starts,
                                const std::vector<index_t> &rows, std::size_t col) {
    return {rows.data() + starts[col], static_cast<std::size_t>(starts[col + 1] - starts[col])};
}

template <bool Count>
DenseMatrix base_impl(const DenseMatrix &x, const Tcsc &t, std::span<const float> bias,
                      OpCounts *counts) {
    const Tally<Count> tally{counts};
    DenseMatrix y(x.rows, t.n);
    for (std::size_t m = 0; m < x.rows; ++m) {
        const float *xrow = x.values.data() + m * x.cols;
        for (std::size_t n = 0; n < t.n; ++n) {
            float acc = 0.0f;
            for (auto i = t.col_start_pos[n]; i < t.col_start_pos[n + 1]; ++i)
                acc += xrow[t.row_index_pos[i]];
            for (auto i = t.col_start_neg[n]; i < t.col_start_neg[n + 1]; ++i)
                acc -= xrow[t.row_index_neg[i]];
            y(m, n) = acc + bias[n];
            tally.adds(static_cast<std::uint64_t>(t.col_start_pos[n + 1] - t.col_start_pos[n]) +
                       static_cast<std::uint64_t>(t.col_start_neg[n + 1] - t.col_start_neg[n]) +
                       1);
        }
    }
    return y;
}

/// Adds (+run) - (-run) of every column of `t` to Y rows [m0, m0+mr), walking columns in
/// tiles of `nr`. With `init_bias` the bias is folded in instead of reading Y.
template <bool Count>
void accumulate_tcsc(const DenseMatrix &x, const Tcsc &t, std::span<const float> bias,
                     DenseMatrix &y, std::size_t m0, std::size_t mr, std::size_t nr, SumFn sums,
                     std::size_t uf, bool init_bias, OpCounts *counts) {
    const Tally<Count> tally{counts};
    std::array<const float *, 4> rows{};
    for (std::size_t r = 0; r < mr; ++r)
        rows[r] = x.values.data() + (m0 + r) * x.cols;
    float pos[4];
    float neg[4];
    for (std::size_t n0 = 0; n0 < t.n; n0 += nr) {
        const std::size_t n1 = std::min(n0 + nr, t.n);
        for (std::size_t n = n0; n < n1; ++n) {
            auto p = run_of(t.col_start_pos, t.row_index_pos, n);
            auto q = run_of(t.col_start_neg, t.row_index_neg, n);
            sums(rows.data(), p.data(), p.size(), pos, uf, counts);
            sums(rows.data(), q.data(), q.size(), neg, uf, counts);
            for (std::size_t r = 0; r < mr; ++r) {
                float &out = y(m0 + r, n);
                out = (init_bias ? bias[n] : out) + (pos[r] - neg[r]);
            }
            tally.adds(2 * mr);
        }
    }
}

/// Applies `body(m0, mr, sums)` to full MR tiles of rows, then to the leftover rows one at a
/// time.
template <class Body>
void for_row_tiles(std::size_t m, const GemmConfig &cfg, std::size_t uf, bool count,
                   Body &&body) {
    const std::size_t mr = cfg.outer_rows;
    const SumFn tile_sums = detail::select_sum(mr, uf, count);
    const SumFn row_sums = detail::select_sum(1, uf, count);
    std::size_t m0 = 0;
    for (; m0 + mr <= m; m0 += mr)
        body(m0, mr, tile_sums);
    for (; m0 < m; ++m0)
        body(m0, 1, row_sums);
}

template <bool Count>
DenseMatrix unrolled_impl(const DenseMatrix &x, const Tcsc &t, std::span<const float> bias,
                          const GemmConfig &cfg) {
    DenseMatrix y(x.rows, t.n);
    const std::size_t uf = cfg.inner_unroll;
    for_row_tiles(x.rows, cfg, uf, Count, [&](std::size_t m0, std::size_t mr, SumFn sums) {
        accumulate_tcsc<Count>(x, t, bias, y, m0, mr, cfg.outer_cols, sums, uf, true,
                               cfg.counts);
    });
    return y;
}

DenseMatrix broadcast_bias(std::size_t m, std::span<const float> bias) {
    DenseMatrix y(m, bias.size());
    for (std::size_t r = 0; r < m; ++r)
        std::copy(bias.begin(), bias.end(), y.row(r).begin());
    return y;
}

template <bool Count>
DenseMatrix blocked_impl(const DenseMatrix &x, const BlockedTcsc &t, std::span<const float> bias,
                         const GemmConfig &cfg) {
    DenseMatrix y = broadcast_bias(x.rows, bias);
    const std::size_t uf = cfg.inner_unroll;
    for (const auto &block : t.blocks) {
        for_row_tiles(x.rows, cfg, uf, Count, [&](std::size_t m0, std::size_t mr, SumFn sums) {
            accumulate_tcsc<Count>(x, block, bias, y, m0, mr, cfg.outer_cols, sums, uf, false,
                                   cfg.counts);
        });
    }
    return y;
}

template <bool Count>
DenseMatrix interleaved_blocked_impl(const DenseMatrix &x, const InterleavedBlockedTcsc &t,
                                     std::span<const float> bias, const GemmConfig &cfg) {
    const Tally<Count> tally{cfg.counts};
    DenseMatrix y = broadcast_bias(x.rows, bias);
    const std::size_t uf = cfg.inner_unroll;
    const std::size_t mr_full = cfg.outer_rows;
    const SumFn tile_pairs = detail::select_pairs(mr_full, t.group, Count);
    const SumFn row_pairs = detail::select_pairs(1, t.group, Count);
    const std::size_t nb = t.num_blocks();
    for (std::size_t b = 0; b < nb; ++b) {
        for_row_tiles(x.rows, cfg, uf, Count, [&](std::size_t m0, std::size_t mr, SumFn sums) {
            const SumFn pairs = mr == mr_full ? tile_pairs : row_pairs;
            std::array<const float *, 4> rows{};
            for (std::size_t r = 0; r < mr; ++r)
                rows[r] = x.values.data() + (m0 + r) * x.cols;
            float inter[4];
            float pos[4];
            float neg[4];
            for (std::size_t n0 = 0; n0 < t.n; n0 += cfg.outer_cols) {
                const std::size_t n1 = std::min(n0 + cfg.outer_cols, t.n);
                for (std::size_t n = n0; n < n1; ++n) {
                    const auto seg = t.segments(b, n);
                    pairs(rows.data(), seg.interleaved.data(), seg.interleaved.size(), inter,
                          t.group, cfg.counts);
                    sums(rows.data(), seg.positives.data(), seg.positives.size(), pos, uf,
                         cfg.counts);
                    sums(rows.data(), seg.negatives.data(), seg.negatives.size(), neg, uf,
                         cfg.counts);
                    for (std::size_t r = 0; r < mr; ++r)
                        y(m0 + r, n) += (inter[r] + pos[r]) - neg[r];
                    tally.adds(3 * mr);
                }
            }
        });
    }
    return y;
}

template <bool Count>
DenseMatrix inverted_impl(const DenseMatrix &x, const InvertedTcsc &t,
                          std::span<const float> bias, OpCounts *counts) {
    const Tally<Count> tally{counts};
    DenseMatrix y(x.rows, t.n);
    for (std::size_t m = 0; m < x.rows; ++m) {
        const float *xrow = x.values.data() + m * x.cols;
        for (std::size_t n = 0; n < t.n; ++n) {
            float acc = 0.0f;
            for (auto i = t.col_start[n]; i < t.col_start[n + 1]; ++i) {
                const std::int32_t v = t.merged_indices[i];
                if (v >= 0)
                    acc += xrow[v];
                else
                    acc -= xrow[~v];
            }
            y(m, n) = acc + bias[n];
            tally.adds(static_cast<std::uint64_t>(t.col_start[n + 1] - t.col_start[n]) + 1);
        }
    }
    return y;
}

template <bool Count>
DenseMatrix compressed_impl(const DenseMatrix &x, const CompressedTcsc &t,
                            std::span<const float> bias, OpCounts *counts) {
    const Tally<Count> tally{counts};
    const auto &table = base3_table();
    DenseMatrix y(x.rows, t.n);
    const std::size_t padding = t.codes_per_column * 5 - t.k;
    for (std::size_t n = 0; n < t.n; ++n) {
        const auto codes = t.column(n);
        for (auto code : codes)
            if (code >= kBase3Codes)
                throw InvalidCodeError(code);
        // padded digits would address X past the end of the row
        if (padding > 0) {
            const auto &last = table[codes.back()];
            for (std::size_t i = 5 - padding; i < 5; ++i)
                if (last[i] != 0)
                    throw CorruptionError("nonzero padding digit in column " +
                                          std::to_string(n));
        }
    }
    for (std::size_t m = 0; m < x.rows; ++m) {
        const float *xrow = x.values.data() + m * x.cols;
        for (std::size_t n = 0; n < t.n; ++n) {
            float acc = 0.0f;
            std::uint64_t ops = 0;
            const auto codes = t.column(n);
            for (std::size_t c = 0; c < codes.size(); ++c) {
                const auto &digits = table[codes[c]];
                const float *xs = xrow + 5 * c;
                for (std::size_t i = 0; i < 5; ++i) {
                    if (digits[i] > 0)
                        acc += xs[i];
                    else if (digits[i] < 0)
                        acc -= xs[i];
                    if constexpr (Count)
                        ops += digits[i] != 0;
                }
            }
            y(m, n) = acc + bias[n];
            tally.adds(ops + 1);
        }
    }
    return y;
}

} // namespace

DenseMatrix gemm_base(const DenseMatrix &x, const Tcsc &t, std::span<const float> bias,
                      OpCounts *counts) {
    detail::check_shapes(x, t.k, t.n, bias);
    return counts ? base_impl<true>(x, t, bias, counts) : base_impl<false>(x, t, bias, nullptr);
}

DenseMatrix gemm_unrolled(const DenseMatrix &x, const Tcsc &t, std::span<const float> bias,
                          const GemmConfig &cfg) {
    detail::check_shapes(x, t.k, t.n, bias);
    cfg.validate();
    return cfg.counts ? unrolled_impl<true>(x, t, bias, cfg)
                      : unrolled_impl<false>(x, t, bias, cfg);
}

DenseMatrix gemm_blocked(const DenseMatrix &x, const BlockedTcsc &t, std::span<const float> bias,
                         const GemmConfig &cfg) {
    detail::check_shapes(x, t.k, t.n, bias);
    cfg.validate();
    return cfg.counts ? blocked_impl<true>(x, t, bias, cfg) : blocked_impl<false>(x, t, bias, cfg);
}

DenseMatrix gemm_interleaved_blocked(const DenseMatrix &x, const InterleavedBlockedTcsc &t,
                                     std::span<const float> bias, const GemmConfig &cfg) {
    detail::check_shapes(x, t.k, t.n, bias);
    cfg.validate();
    if (t.group == 0 || t.block_size == 0)
        throw ParameterError("interleaved-blocked format has zero group or block size");
    return cfg.counts ? interleaved_blocked_impl<true>(x, t, bias, cfg)
                      : interleaved_blocked_impl<false>(x, t, bias, cfg);
}

DenseMatrix gemm_inverted(const DenseMatrix &x, const InvertedTcsc &t,
                          std::span<const float> bias, OpCounts *counts) {
    detail::check_shapes(x, t.k, t.n, bias);
    return counts ? inverted_impl<true>(x, t, bias, counts)
                  : inverted_impl<false>(x, t, bias, nullptr);
}

DenseMatrix gemm_compressed(const DenseMatrix &x, const CompressedTcsc &t,
                            std::span<const float> bias, OpCounts *counts) {
    detail::check_shapes(x, t.k, t.n, bias);
    if (t.codes.size() != t.codes_per_column * t.n || t.codes_per_column != (t.k + 4) / 5)
        throw CorruptionError("compressed code array does not match K and N");
    return counts ? compressed_impl<true>(x, t, bias, counts)
                  : compressed_impl<false>(x, t, bias, nullptr);
}

} // namespace stgemm
