#include "stgemm/formats.hpp"

#include "stgemm/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace stgemm {

std::size_t default_block_size(std::size_t k) { return std::min<std::size_t>(k, 4096); }

namespace {

struct SignedIndices {
    std::vector<index_t> pos;
    std::vector<index_t> neg;
};

SignedIndices collect_column(const TernaryDense &w, std::size_t col, std::size_t lo,
                             std::size_t hi) {
    SignedIndices out;
    for (std::size_t r = lo; r < hi; ++r) {
        const auto v = w(r, col);
        if (v > 0)
            out.pos.push_back(static_cast<index_t>(r));
        else if (v < 0)
            out.neg.push_back(static_cast<index_t>(r));
    }
    return out;
}

/// Writes one column's three segments and their end offsets.
void append_interleaved(const SignedIndices &col, std::size_t group,
                        std::vector<index_t> &all, std::vector<index_t> &ptr) {
    const std::size_t paired = group * (std::min(col.pos.size(), col.neg.size()) / group);
    for (std::size_t i = 0; i < paired; i += group) {
        all.insert(all.end(), col.pos.begin() + i, col.pos.begin() + i + group);
        all.insert(all.end(), col.neg.begin() + i, col.neg.begin() + i + group);
    }
    ptr.push_back(static_cast<index_t>(all.size()));
    all.insert(all.end(), col.pos.begin() + paired, col.pos.end());
    ptr.push_back(static_cast<index_t>(all.size()));
    all.insert(all.end(), col.neg.begin() + paired, col.neg.end());
    ptr.push_back(static_cast<index_t>(all.size()));
}

/// Sets W(row, col) = sign, rejecting rows outside [lo, hi) and double assignments.
void place(TernaryDense &w, index_t row, std::size_t col, std::int8_t sign, std::size_t lo,
           std::size_t hi) {
    if (row < 0 || static_cast<std::size_t>(row) < lo || static_cast<std::size_t>(row) >= hi)
        throw CorruptionError("row index " + std::to_string(row) + " outside [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + ") in column " +
                              std::to_string(col));
    auto &cell = w(static_cast<std::size_t>(row), col);
    if (cell != 0)
        throw CorruptionError("row " + std::to_string(row) + " stored twice in column " +
                              std::to_string(col));
    cell = sign;
}

void check_segment_ptr(const std::vector<index_t> &ptr, std::size_t slices,
                       std::size_t total) {
    if (ptr.size() != 3 * slices + 1)
        throw CorruptionError("segment pointer array has wrong length");
    if (ptr.front() != 0 || static_cast<std::size_t>(ptr.back()) != total)
        throw CorruptionError("segment pointers do not span the index array");
    if (!std::is_sorted(ptr.begin(), ptr.end()))
        throw CorruptionError("segment pointers are not monotonic");
}

void decode_segments(TernaryDense &w, const ColumnSegments &seg, std::size_t col,
                     std::size_t group, std::size_t lo, std::size_t hi) {
    if (seg.interleaved.size() % (2 * group) != 0)
        throw CorruptionError("interleaved segment of column " + std::to_string(col) +
                              " is not a whole number of sign groups");
    for (std::size_t i = 0; i < seg.interleaved.size(); ++i) {
        const bool positive = (i / group) % 2 == 0;
        place(w, seg.interleaved[i], col, positive ? 1 : -1, lo, hi);
    }
    for (auto r : seg.positives)
        place(w, r, col, 1, lo, hi);
    for (auto r : seg.negatives)
        place(w, r, col, -1, lo, hi);
}

ColumnSegments slice_segments(const std::vector<index_t> &all, const std::vector<index_t> &ptr,
                              std::size_t slice) {
    const index_t *base = all.data();
    auto span_of = [&](std::size_t a) {
        return std::span<const index_t>(base + ptr[a], static_cast<std::size_t>(ptr[a + 1] - ptr[a]));
    };
    return {span_of(3 * slice), span_of(3 * slice + 1), span_of(3 * slice + 2)};
}

} // namespace

// ---------------------------------------------------------------------------

BlockedTcsc blocked_from_dense(const TernaryDense &w, std::size_t block_size) {
    if (block_size == 0)
        throw ParameterError("block size must be >= 1");
    BlockedTcsc out{w.rows, w.cols, block_size, {}};
    const std::size_t nb = num_blocks(w.rows, block_size);
    out.blocks.reserve(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * block_size;
        const std::size_t hi = std::min(lo + block_size, w.rows);
        Tcsc t;
        t.k = w.rows;
        t.n = w.cols;
        t.col_start_pos.push_back(0);
        t.col_start_neg.push_back(0);
        for (std::size_t j = 0; j < w.cols; ++j) {
            auto col = collect_column(w, j, lo, hi);
            t.row_index_pos.insert(t.row_index_pos.end(), col.pos.begin(), col.pos.end());
            t.row_index_neg.insert(t.row_index_neg.end(), col.neg.begin(), col.neg.end());
            t.col_start_pos.push_back(static_cast<index_t>(t.row_index_pos.size()));
            t.col_start_neg.push_back(static_cast<index_t>(t.row_index_neg.size()));
        }
        out.blocks.push_back(std::move(t));
    }
    return out;
}

TernaryDense to_dense(const BlockedTcsc &t) {
    if (t.block_size == 0 || t.blocks.size() != num_blocks(t.k, t.block_size))
        throw CorruptionError("block count does not match K and block size");
    TernaryDense w(t.k, t.n);
    for (std::size_t b = 0; b < t.blocks.size(); ++b) {
        const auto &blk = t.blocks[b];
        if (blk.k != t.k || blk.n != t.n)
            throw CorruptionError("block " + std::to_string(b) + " has mismatched dimensions");
        auto problems = validate(blk);
        if (!problems.empty())
            throw CorruptionError("block " + std::to_string(b) + ": " + problems.front().message);
        const std::size_t lo = b * t.block_size;
        const std::size_t hi = std::min(lo + t.block_size, t.k);
        for (std::size_t j = 0; j < t.n; ++j) {
            for (auto i = blk.col_start_pos[j]; i < blk.col_start_pos[j + 1]; ++i)
                place(w, blk.row_index_pos[i], j, 1, lo, hi);
            for (auto i = blk.col_start_neg[j]; i < blk.col_start_neg[j + 1]; ++i)
                place(w, blk.row_index_neg[i], j, -1, lo, hi);
        }
    }
    return w;
}

std::size_t format_bytes(const BlockedTcsc &t) {
    std::size_t total = 0;
    for (const auto &blk : t.blocks)
        total += format_bytes(blk);
    return total;
}

// ---------------------------------------------------------------------------

ColumnSegments InterleavedTcsc::segments(std::size_t col) const {
    return slice_segments(all_indices, col_segment_ptr, col);
}

InterleavedTcsc interleaved_from_dense(const TernaryDense &w, std::size_t group) {
    if (group == 0)
        throw ParameterError("interleave group size must be >= 1");
    InterleavedTcsc out{w.rows, w.cols, group, {}, {0}};
    out.col_segment_ptr.reserve(3 * w.cols + 1);
    for (std::size_t j = 0; j < w.cols; ++j)
        append_interleaved(collect_column(w, j, 0, w.rows), group, out.all_indices,
                           out.col_segment_ptr);
    return out;
}

TernaryDense to_dense(const InterleavedTcsc &t) {
    if (t.group == 0)
        throw CorruptionError("interleave group size is zero");
    check_segment_ptr(t.col_segment_ptr, t.n, t.all_indices.size());
    TernaryDense w(t.k, t.n);
    for (std::size_t j = 0; j < t.n; ++j)
        decode_segments(w, t.segments(j), j, t.group, 0, t.k);
    return w;
}

std::size_t format_bytes(const InterleavedTcsc &t) {
    return sizeof(index_t) * (t.all_indices.size() + t.col_segment_ptr.size());
}

ColumnSegments InterleavedBlockedTcsc::segments(std::size_t block, std::size_t col) const {
    return slice_segments(all_indices, col_segment_ptr, block * n + col);
}

InterleavedBlockedTcsc interleaved_blocked_from_dense(const TernaryDense &w,
                                                      std::size_t block_size,
                                                      std::size_t group) {
    if (block_size == 0)
        block_size = default_block_size(w.rows);
    if (group == 0)
        throw ParameterError("interleave group size must be >= 1");
    InterleavedBlockedTcsc out{w.rows, w.cols, block_size, group, {}, {0}};
    const std::size_t nb = out.num_blocks();
    out.col_segment_ptr.reserve(3 * nb * w.cols + 1);
    out.all_indices.reserve(w.nnz());
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * block_size;
        const std::size_t hi = std::min(lo + block_size, w.rows);
        for (std::size_t j = 0; j < w.cols; ++j)
            append_interleaved(collect_column(w, j, lo, hi), group, out.all_indices,
                               out.col_segment_ptr);
    }
    return out;
}

TernaryDense to_dense(const InterleavedBlockedTcsc &t) {
    if (t.group == 0 || t.block_size == 0)
        throw CorruptionError("interleaved-blocked format has zero group or block size");
    const std::size_t nb = t.num_blocks();
    check_segment_ptr(t.col_segment_ptr, nb * t.n, t.all_indices.size());
    TernaryDense w(t.k, t.n);
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * t.block_size;
        const std::size_t hi = std::min(lo + t.block_size, t.k);
        for (std::size_t j = 0; j < t.n; ++j)
            decode_segments(w, t.segments(b, j), j, t.group, lo, hi);
    }
    return w;
}

std::size_t format_bytes(const InterleavedBlockedTcsc &t) {
    return sizeof(index_t) * (t.all_indices.size() + t.col_segment_ptr.size());
}

// ---------------------------------------------------------------------------

InvertedTcsc inverted_from_dense(const TernaryDense &w) {
    InvertedTcsc out{w.rows, w.cols, {0}, {}};
    out.col_start.reserve(w.cols + 1);
    for (std::size_t j = 0; j < w.cols; ++j) {
        for (std::size_t r = 0; r < w.rows; ++r) {
            const auto v = w(r, j);
            if (v != 0)
                out.merged_indices.push_back(encode_inverted(static_cast<std::int32_t>(r), v));
        }
        out.col_start.push_back(static_cast<index_t>(out.merged_indices.size()));
    }
    return out;
}

TernaryDense to_dense(const InvertedTcsc &t) {
    if (t.col_start.size() != t.n + 1 || t.col_start.front() != 0 ||
        static_cast<std::size_t>(t.col_start.back()) != t.merged_indices.size() ||
        !std::is_sorted(t.col_start.begin(), t.col_start.end()))
        throw CorruptionError("inverted-index column offsets are inconsistent");
    TernaryDense w(t.k, t.n);
    for (std::size_t j = 0; j < t.n; ++j)
        for (auto i = t.col_start[j]; i < t.col_start[j + 1]; ++i) {
            const auto [row, sign] = decode_inverted(t.merged_indices[i]);
            place(w, row, j, sign, 0, t.k);
        }
    return w;
}

std::size_t format_bytes(const InvertedTcsc &t) {
    return sizeof(index_t) * (t.col_start.size() + t.merged_indices.size());
}

// ---------------------------------------------------------------------------

std::uint8_t compress5(const Ternary5 &v) {
    unsigned code = 0;
    unsigned weight = 1;
    for (auto digit : v) {
        if (digit < -1 || digit > 1)
            throw ParameterError("compress5 entry outside {-1, 0, +1}");
        code += static_cast<unsigned>(digit + 1) * weight;
        weight *= 3;
    }
    return static_cast<std::uint8_t>(code);
}

const std::array<Ternary5, kBase3Codes> &base3_table() {
    static const auto table = [] {
        std::array<Ternary5, kBase3Codes> t{};
        for (unsigned code = 0; code < kBase3Codes; ++code) {
            unsigned rest = code;
            for (auto &digit : t[code]) {
                digit = static_cast<std::int8_t>(static_cast<int>(rest % 3) - 1);
                rest /= 3;
            }
        }
        return t;
    }();
    return table;
}

Ternary5 decompress5(std::uint8_t code) {
    if (code >= kBase3Codes)
        throw InvalidCodeError(code);
    return base3_table()[code];
}

CompressedTcsc compressed_from_dense(const TernaryDense &w) {
    const std::size_t per_col = (w.rows + 4) / 5;
    CompressedTcsc out{w.rows, w.cols, per_col, std::vector<std::uint8_t>(per_col * w.cols)};
    for (std::size_t j = 0; j < w.cols; ++j) {
        for (std::size_t c = 0; c < per_col; ++c) {
            Ternary5 digits{};
            for (std::size_t i = 0; i < 5; ++i) {
                const std::size_t r = 5 * c + i;
                digits[i] = r < w.rows ? w(r, j) : 0;
            }
            out.codes[j * per_col + c] = compress5(digits);
        }
    }
    return out;
}

TernaryDense to_dense(const CompressedTcsc &t) {
    if (t.codes_per_column != (t.k + 4) / 5 || t.codes.size() != t.codes_per_column * t.n)
        throw CorruptionError("compressed code array does not match K and N");
    TernaryDense w(t.k, t.n);
    for (std::size_t j = 0; j < t.n; ++j) {
        auto col = t.column(j);
        for (std::size_t c = 0; c < col.size(); ++c) {
            const auto digits = decompress5(col[c]);
            for (std::size_t i = 0; i < 5; ++i) {
                const std::size_t r = 5 * c + i;
                if (r < t.k)
                    w(r, j) = digits[i];
                else if (digits[i] != 0)
                    throw CorruptionError("nonzero padding digit in column " +
                                          std::to_string(j));
            }
        }
    }
    return w;
}

std::size_t format_bytes(const CompressedTcsc &t) { return t.codes.size(); }

// ---------------------------------------------------------------------------

std::size_t SymmetricInterleavedTcsc::dummy_count() const {
    return static_cast<std::size_t>(
        std::count(all_indices.begin(), all_indices.end(), dummy_index()));
}

double SymmetricInterleavedTcsc::pad_overhead() const {
    if (all_indices.empty())
        return 0.0;
    return static_cast<double>(dummy_count()) / static_cast<double>(all_indices.size());
}

SymmetricInterleavedTcsc symmetric_from_dense(const TernaryDense &w, std::size_t group) {
    if (w.cols % kLanes != 0)
        throw ParameterError("N must be divisible by 4 (got N = " + std::to_string(w.cols) +
                             ")");
    if (group != 1 && group != 2 && group != 4)
        throw ParameterError("symmetric interleave group size must be 1, 2 or 4");
    SymmetricInterleavedTcsc out{w.rows, w.cols, group, {0}, {}, {}};
    const index_t dummy = out.dummy_index();
    out.col_start.reserve(w.cols + 1);
    for (std::size_t g0 = 0; g0 < w.cols; g0 += kLanes) {
        std::array<SignedIndices, kLanes> cols;
        std::size_t pairs = 0;
        for (std::size_t c = 0; c < kLanes; ++c) {
            cols[c] = collect_column(w, g0 + c, 0, w.rows);
            pairs = std::max({pairs, cols[c].pos.size(), cols[c].neg.size()});
        }
        pairs = (pairs + kLanes - 1) / kLanes * kLanes;
        out.group_pairs.push_back(static_cast<index_t>(pairs));
        for (auto &col : cols) {
            col.pos.resize(pairs, dummy);
            col.neg.resize(pairs, dummy);
            for (std::size_t i = 0; i < pairs; i += group) {
                out.all_indices.insert(out.all_indices.end(), col.pos.begin() + i,
                                       col.pos.begin() + i + group);
                out.all_indices.insert(out.all_indices.end(), col.neg.begin() + i,
                                       col.neg.begin() + i + group);
            }
            out.col_start.push_back(static_cast<index_t>(out.all_indices.size()));
        }
    }
    return out;
}

TernaryDense to_dense(const SymmetricInterleavedTcsc &t) {
    if (t.n % kLanes != 0 || (t.group != 1 && t.group != 2 && t.group != 4))
        throw CorruptionError("symmetric format has invalid N or group size");
    if (t.col_start.size() != t.n + 1 || t.group_pairs.size() != t.n / kLanes ||
        t.col_start.front() != 0 ||
        static_cast<std::size_t>(t.col_start.back()) != t.all_indices.size())
        throw CorruptionError("symmetric format offsets are inconsistent");
    TernaryDense w(t.k, t.n);
    for (std::size_t j = 0; j < t.n; ++j) {
        const auto pairs = static_cast<std::size_t>(t.group_pairs[j / kLanes]);
        if (t.col_start[j + 1] - t.col_start[j] != static_cast<index_t>(2 * pairs) ||
            pairs % kLanes != 0)
            throw CorruptionError("column " + std::to_string(j) +
                                  " breaks the symmetric pair count");
        auto col = t.column(j);
        for (std::size_t i = 0; i < col.size(); ++i) {
            if (col[i] == t.dummy_index())
                continue;
            const bool positive = (i / t.group) % 2 == 0;
            place(w, col[i], j, positive ? 1 : -1, 0, t.k);
        }
    }
    return w;
}

std::size_t format_bytes(const SymmetricInterleavedTcsc &t) {
    return sizeof(index_t) * (t.col_start.size() + t.all_indices.size() + t.group_pairs.size());
}

} // namespace stgemm
