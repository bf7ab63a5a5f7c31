#pragma once

// On-disk formats. All integers little-endian.
//
// Dense ternary file:
//   "STGD" | u32 version (1) | u32 K | u32 N | K*N signed bytes, row-major
//
// Sparse file:
//   "STGS" | u32 version (1) | u32 format tag | u32 K | u32 N | u32 block size | u32 group
//   | u32 section count | sections...
// Each section is a four-character tag, u32 element width (1 or 4), u32 element count, then
// the elements. Block size / group are 0 when the format has none; for the compressed format
// the block-size slot carries codes per column.

#include "stgemm/dense.hpp"
#include "stgemm/formats.hpp"
#include "stgemm/tcsc.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace stgemm {

enum class FormatKind : std::uint32_t {
    Tcsc = 1,
    Blocked = 2,
    Interleaved = 3,
    InterleavedBlocked = 4,
    Inverted = 5,
    Compressed = 6,
    Symmetric = 7,
};

std::string to_string(FormatKind kind);
/// "tcsc", "blocked", "interleaved", "interleaved_blocked", "inverted", "compressed",
/// "symmetric". Throws ParameterError otherwise.
FormatKind parse_format_kind(const std::string &name);

using SparseMatrix = std::variant<Tcsc, BlockedTcsc, InterleavedTcsc, InterleavedBlockedTcsc,
                                  InvertedTcsc, CompressedTcsc, SymmetricInterleavedTcsc>;

FormatKind kind_of(const SparseMatrix &s);

/// Encodes W in `kind`. Zero block size / group pick each format's default.
SparseMatrix encode_format(FormatKind kind, const TernaryDense &w, std::size_t block_size = 0,
                           std::size_t group = 0);
TernaryDense to_dense(const SparseMatrix &s);

std::vector<std::uint8_t> serialize_dense(const TernaryDense &w);
std::vector<std::uint8_t> serialize_sparse(const SparseMatrix &s);

/// Both throw ParseError carrying the byte offset of the first malformed field.
TernaryDense parse_dense(std::span<const std::uint8_t> bytes);
SparseMatrix parse_sparse(std::span<const std::uint8_t> bytes);

bool looks_like_dense(std::span<const std::uint8_t> bytes);
bool looks_like_sparse(std::span<const std::uint8_t> bytes);

/// Throw std::runtime_error when the file cannot be opened or written.
std::vector<std::uint8_t> read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::span<const std::uint8_t> bytes);

} // namespace stgemm
