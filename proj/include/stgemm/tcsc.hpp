#pragma once

#include "stgemm/dense.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace stgemm {

/// Row indices and column offsets are 32-bit throughout.
using index_t = std::int32_t;

/// Ternary compressed sparse column storage: +1 and -1 entries live in separate
/// index arrays, so no values are stored. Column j's positives are
/// row_index_pos[col_start_pos[j] .. col_start_pos[j+1]), likewise for negatives.
struct Tcsc {
    std::size_t k = 0;
    std::size_t n = 0;
    std::vector<index_t> col_start_pos;
    std::vector<index_t> row_index_pos;
    std::vector<index_t> col_start_neg;
    std::vector<index_t> row_index_neg;

    std::size_t nnz() const { return row_index_pos.size() + row_index_neg.size(); }

    friend bool operator==(const Tcsc &, const Tcsc &) = default;
};

enum class ViolationKind {
    OffsetsLength,
    OffsetsStart,
    NonMonotonicOffsets,
    OffsetsEnd,
    IndexOutOfRange,
    UnsortedColumn,
    SignOverlap,
};

struct Violation {
    ViolationKind kind;
    std::string message;
};

std::string to_string(ViolationKind kind);

Tcsc tcsc_from_dense(const TernaryDense &w);

/// Throws CorruptionError if the structure is invalid, including a row that appears in both
/// the +1 and -1 slices of one column.
TernaryDense tcsc_to_dense(const Tcsc &t);

/// Every violated structural invariant; empty when `t` is well formed.
std::vector<Violation> validate(const Tcsc &t);

/// Exact storage footprint of the four arrays, 4 bytes per element.
std::size_t format_bytes(const Tcsc &t);

} // namespace stgemm
