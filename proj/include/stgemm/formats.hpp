#pragma once

#include "stgemm/dense.hpp"
#include "stgemm/tcsc.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace stgemm {

/// Block size used when none is requested: min(K, 4096).
std::size_t default_block_size(std::size_t k);

inline std::size_t num_blocks(std::size_t k, std::size_t block_size) {
    return (k + block_size - 1) / block_size;
}

// ---------------------------------------------------------------------------
// Blocked

/// K rows split into blocks of `block_size`; block b holds a full TCSC (global row indices)
/// restricted to rows [b*B, min((b+1)*B, K)).
struct BlockedTcsc {
    std::size_t k = 0;
    std::size_t n = 0;
    std::size_t block_size = 0;
    std::vector<Tcsc> blocks;

    friend bool operator==(const BlockedTcsc &, const BlockedTcsc &) = default;
};

BlockedTcsc blocked_from_dense(const TernaryDense &w, std::size_t block_size);
TernaryDense to_dense(const BlockedTcsc &t);
std::size_t format_bytes(const BlockedTcsc &t);

// ---------------------------------------------------------------------------
// Interleaved

/// The three index runs of one column (or one block of one column).
struct ColumnSegments {
    /// Alternating runs of `group` positive then `group` negative indices.
    std::span<const index_t> interleaved;
    std::span<const index_t> positives;
    std::span<const index_t> negatives;
};

/// Each column stores r = g*floor(min(p, q)/g) indices of each sign interleaved in runs of g
/// (positives first), then the p-r leftover positives, then the q-r leftover negatives.
/// col_segment_ptr has 3 entries per column plus a sentinel.
struct InterleavedTcsc {
    std::size_t k = 0;
    std::size_t n = 0;
    std::size_t group = 0;
    std::vector<index_t> all_indices;
    std::vector<index_t> col_segment_ptr;

    ColumnSegments segments(std::size_t col) const;

    friend bool operator==(const InterleavedTcsc &, const InterleavedTcsc &) = default;
};

InterleavedTcsc interleaved_from_dense(const TernaryDense &w, std::size_t group = 4);
TernaryDense to_dense(const InterleavedTcsc &t);
std::size_t format_bytes(const InterleavedTcsc &t);

/// Interleaving applied inside each (block, column) slice. Slices are ordered block-major:
/// slice (b, j) owns col_segment_ptr[3*(b*N + j) .. 3*(b*N + j) + 3].
struct InterleavedBlockedTcsc {
    std::size_t k = 0;
    std::size_t n = 0;
    std::size_t block_size = 0;
    std::size_t group = 0;
    std::vector<index_t> all_indices;
    std::vector<index_t> col_segment_ptr;

    std::size_t num_blocks() const { return stgemm::num_blocks(k, block_size); }
    ColumnSegments segments(std::size_t block, std::size_t col) const;

    friend bool operator==(const InterleavedBlockedTcsc &,
                           const InterleavedBlockedTcsc &) = default;
};

/// `block_size` 0 selects min(K, 4096).
InterleavedBlockedTcsc interleaved_blocked_from_dense(const TernaryDense &w,
                                                      std::size_t block_size = 0,
                                                      std::size_t group = 2);
TernaryDense to_dense(const InterleavedBlockedTcsc &t);
std::size_t format_bytes(const InterleavedBlockedTcsc &t);

// ---------------------------------------------------------------------------
// Inverted index

struct SignedRow {
    std::int32_t row;
    std::int8_t sign;

    friend bool operator==(const SignedRow &, const SignedRow &) = default;
};

/// +1 at row i is stored as i, -1 as ~i.
constexpr std::int32_t encode_inverted(std::int32_t row, std::int8_t sign) {
    return sign > 0 ? row : ~row;
}

constexpr SignedRow decode_inverted(std::int32_t v) {
    return v >= 0 ? SignedRow{v, 1} : SignedRow{~v, -1};
}

/// One merged index run per column, ordered by decoded row.
struct InvertedTcsc {
    std::size_t k = 0;
    std::size_t n = 0;
    std::vector<index_t> col_start;
    std::vector<std::int32_t> merged_indices;

    friend bool operator==(const InvertedTcsc &, const InvertedTcsc &) = default;
};

InvertedTcsc inverted_from_dense(const TernaryDense &w);
TernaryDense to_dense(const InvertedTcsc &t);
std::size_t format_bytes(const InvertedTcsc &t);

// ---------------------------------------------------------------------------
// Base-3 compression

using Ternary5 = std::array<std::int8_t, 5>;

inline constexpr unsigned kBase3Codes = 243;

/// code = sum_i (v[i] + 1) * 3^i. Throws ParameterError for a non-ternary entry.
std::uint8_t compress5(const Ternary5 &v);

/// Inverse of compress5. Throws InvalidCodeError for code >= 243.
Ternary5 decompress5(std::uint8_t code);

/// code -> 5-tuple, for every valid code.
const std::array<Ternary5, kBase3Codes> &base3_table();

/// Each column is zero-padded to a multiple of 5 rows and stored as ceil(K/5) byte codes.
/// Codes for column j occupy codes[j*codes_per_column .. (j+1)*codes_per_column).
struct CompressedTcsc {
    std::size_t k = 0;
    std::size_t n = 0;
    std::size_t codes_per_column = 0;
    std::vector<std::uint8_t> codes;

    std::span<const std::uint8_t> column(std::size_t j) const {
        return {codes.data() + j * codes_per_column, codes_per_column};
    }

    friend bool operator==(const CompressedTcsc &, const CompressedTcsc &) = default;
};

CompressedTcsc compressed_from_dense(const TernaryDense &w);
TernaryDense to_dense(const CompressedTcsc &t);
std::size_t format_bytes(const CompressedTcsc &t);

// ---------------------------------------------------------------------------
// Symmetric interleaved (4-lane)

inline constexpr std::size_t kLanes = 4;

/// Every nonzero of a column sits in the interleaved region as one half of a (+, -) pair.
/// Inside each group of 4 adjacent columns all columns hold the same pair count, rounded up
/// to a multiple of 4; the missing halves are the dummy row index K. Column j's entries are
/// all_indices[col_start[j] .. col_start[j+1]), alternating runs of `group` positives and
/// `group` negatives.
struct SymmetricInterleavedTcsc {
    std::size_t k = 0;
    std::size_t n = 0;
    std::size_t group = 0;
    std::vector<index_t> col_start;
    std::vector<index_t> all_indices;
    /// Pair count shared by the columns of each 4-column group.
    std::vector<index_t> group_pairs;

    index_t dummy_index() const { return static_cast<index_t>(k); }
    std::span<const index_t> column(std::size_t j) const {
        return {all_indices.data() + col_start[j],
                static_cast<std::size_t>(col_start[j + 1] - col_start[j])};
    }
    std::size_t dummy_count() const;
    /// Dummy entries as a fraction of all stored entries (0 when nothing is stored).
    double pad_overhead() const;

    friend bool operator==(const SymmetricInterleavedTcsc &,
                           const SymmetricInterleavedTcsc &) = default;
};

/// Requires N % 4 == 0 and group in {1, 2, 4}.
SymmetricInterleavedTcsc symmetric_from_dense(const TernaryDense &w, std::size_t group = 2);
TernaryDense to_dense(const SymmetricInterleavedTcsc &t);
std::size_t format_bytes(const SymmetricInterleavedTcsc &t);

/// Position of the u-th positive (resp. negative) inside a run of pairs laid out in
/// alternating groups of `group`.
constexpr std::size_t interleaved_pos_slot(std::size_t u, std::size_t group) {
    return (u / group) * 2 * group + u % group;
}
constexpr std::size_t interleaved_neg_slot(std::size_t u, std::size_t group) {
    return interleaved_pos_slot(u, group) + group;
}

} // namespace stgemm
