#pragma once

#include "stgemm/dense.hpp"
#include "stgemm/formats.hpp"
#include "stgemm/tcsc.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stgemm {

/// Floating-point operations a kernel actually executed. Subtractions count as additions;
/// a 4-lane vector add counts as 4.
struct OpCounts {
    std::uint64_t adds = 0;
    std::uint64_t mults = 0;

    friend bool operator==(const OpCounts &, const OpCounts &) = default;
};

enum class Variant {
    Base,
    Unrolled,
    Blocked,
    InterleavedBlocked,
    Inverted,
    Compressed,
    Vertical,
    Horizontal,
    VectorizedOptimal,
};

std::string to_string(Variant v);
/// Throws ParameterError for an unknown name.
Variant parse_variant(const std::string &name);
std::vector<Variant> all_variants();
std::vector<Variant> scalar_variants();
std::vector<Variant> simd_variants();
bool is_simd(Variant v);

/// Kernel selection plus tunables. Zero for block_size / group means "use the variant's
/// default" (min(K, 4096); g = 4 scalar, g = 2 vectorized).
struct GemmConfig {
    Variant variant = Variant::Base;
    std::size_t inner_unroll = 12;
    std::size_t outer_rows = 4;
    std::size_t outer_cols = 4;
    std::size_t block_size = 0;
    std::size_t group = 0;
    std::optional<float> alpha;
    /// When set, the kernel tallies every floating-point operation it performs here.
    OpCounts *counts = nullptr;

    /// Throws ParameterError on UF = 0, MR/NR outside {1, 2, 4}.
    void validate() const;
    std::size_t resolved_block_size(std::size_t k) const;
    std::size_t resolved_group() const;
};

/// Dot products column by column: +1 indices first, then -1 indices, one accumulator.
DenseMatrix gemm_base(const DenseMatrix &x, const Tcsc &t, std::span<const float> bias,
                      OpCounts *counts = nullptr);

/// `inner_unroll` independent accumulators over each index run, `outer_rows` rows of X and
/// `outer_cols` output columns per outer iteration, with cleanup for every remainder.
DenseMatrix gemm_unrolled(const DenseMatrix &x, const Tcsc &t, std::span<const float> bias,
                          const GemmConfig &cfg = {});

/// Y starts as the broadcast bias and is accumulated block by block.
DenseMatrix gemm_blocked(const DenseMatrix &x, const BlockedTcsc &t, std::span<const float> bias,
                         const GemmConfig &cfg = {});

/// Three phases per (block, column): interleaved +/- groups, leftover +, leftover -.
DenseMatrix gemm_interleaved_blocked(const DenseMatrix &x, const InterleavedBlockedTcsc &t,
                                     std::span<const float> bias, const GemmConfig &cfg = {});

/// Single inner loop, sign recovered from each entry's sign bit.
DenseMatrix gemm_inverted(const DenseMatrix &x, const InvertedTcsc &t,
                          std::span<const float> bias, OpCounts *counts = nullptr);

/// Decodes each byte through the 243-entry table; zero digits are skipped.
/// Throws InvalidCodeError when a code >= 243 is met.
DenseMatrix gemm_compressed(const DenseMatrix &x, const CompressedTcsc &t,
                            std::span<const float> bias, OpCounts *counts = nullptr);

} // namespace stgemm
