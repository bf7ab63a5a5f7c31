#include "stgemm/error.hpp"
#include "stgemm/kernels.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace stgemm;

namespace {

const DenseMatrix kWorkedY(1, 2, std::vector<float>{12, 18});

struct Case {
    std::size_t m, k, n;
    SparsityLevel s;
    std::uint64_t seed;
};

std::vector<Case> sweep(std::size_t count) {
    std::vector<Case> out;
    const auto levels = paper_sparsities();
    for (std::size_t i = 0; i < count; ++i)
        out.push_back({1 + i % 9, 16 + (i * 389) % 2000, 4 + (i * 7) % 61, levels[i % 4],
                       1000 + i});
    return out;
}

GemmConfig with(Variant v, std::size_t uf = 12, std::size_t mr = 4, std::size_t nr = 4) {
    GemmConfig cfg;
    cfg.variant = v;
    cfg.inner_unroll = uf;
    cfg.outer_rows = mr;
    cfg.outer_cols = nr;
    return cfg;
}

/// Every scalar kernel, each on its own encoding of `w`.
std::vector<std::pair<std::string, DenseMatrix>>
all_scalar(const DenseMatrix &x, const TernaryDense &w, std::span<const float> b,
           const GemmConfig &cfg, std::size_t block, std::size_t group) {
    const auto t = tcsc_from_dense(w);
    return {
        {"base", gemm_base(x, t, b)},
        {"unrolled", gemm_unrolled(x, t, b, cfg)},
        {"blocked", gemm_blocked(x, blocked_from_dense(w, block), b, cfg)},
        {"interleaved_blocked",
         gemm_interleaved_blocked(x, interleaved_blocked_from_dense(w, block, group), b, cfg)},
        {"inverted", gemm_inverted(x, inverted_from_dense(w), b)},
        {"compressed", gemm_compressed(x, compressed_from_dense(w), b)},
    };
}

} // namespace

TEST(ScalarKernels, WorkedExample) {
    const auto w = test::worked_w();
    for (const auto &[name, y] :
         all_scalar(test::worked_x(), w, test::worked_bias(), with(Variant::Unrolled), 2, 1))
        EXPECT_EQ(y, kWorkedY) << name;
}

TEST(ScalarKernels, ZeroWeightsGiveBias) {
    const TernaryDense w(11, 5);
    const auto x = gen_input(3, 11, 4);
    const std::vector<float> b{1, -2, 3, -4, 5};
    for (const auto &[name, y] : all_scalar(x, w, b, with(Variant::Unrolled), 4, 2))
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 5; ++c)
                EXPECT_EQ(y(r, c), b[c]) << name;
}

TEST(ScalarKernels, RandomSweepMatchesOracle) {
    for (const auto &c : sweep(60)) {
        const auto w = gen_ternary(c.k, c.n, c.s, c.seed);
        const auto x = gen_input(c.m, c.k, c.seed + 1);
        const auto b = gen_bias(c.n, c.seed + 2);
        const auto expected = oracle_gemm(x, w, b);
        const std::size_t block = 1 + c.seed % c.k;
        for (const auto &[name, y] : all_scalar(x, w, b, with(Variant::Unrolled), block, 1 + c.seed % 4))
            EXPECT_EQ(y, expected) << name << " M=" << c.m << " K=" << c.k << " N=" << c.n;
    }
}

TEST(Unrolled, EveryTileConfiguration) {
    const auto w = gen_ternary(301, 13, {1, 4}, 3);
    const auto x = gen_input(7, 301, 4);
    const auto b = gen_bias(13, 5);
    const auto t = tcsc_from_dense(w);
    const auto expected = oracle_gemm(x, w, b);
    for (std::size_t uf : {1, 2, 3, 4, 8, 12, 16, 20})
        for (std::size_t mr : {1, 2, 4})
            for (std::size_t nr : {1, 2, 4})
                EXPECT_EQ(gemm_unrolled(x, t, b, with(Variant::Unrolled, uf, mr, nr)), expected)
                    << "UF=" << uf << " MR=" << mr << " NR=" << nr;
}

TEST(Unrolled, WorkedExampleWithDefaultTiles) {
    EXPECT_EQ(gemm_unrolled(test::worked_x(), tcsc_from_dense(test::worked_w()),
                            test::worked_bias(), with(Variant::Unrolled, 12, 4)),
              kWorkedY);
}

TEST(Unrolled, SingleAccumulatorMatchesBase) {
    const auto w = gen_ternary(200, 9, {1, 2}, 1);
    const auto x = gen_input(6, 200, 2);
    const auto b = gen_bias(9, 3);
    const auto t = tcsc_from_dense(w);
    EXPECT_EQ(gemm_unrolled(x, t, b, with(Variant::Unrolled, 1, 1, 1)), gemm_base(x, t, b));
}

TEST(Unrolled, RemainderRows) {
    const auto w = gen_ternary(64, 8, {1, 4}, 6);
    const auto x = gen_input(5, 64, 7);
    const auto b = gen_bias(8, 8);
    EXPECT_EQ(gemm_unrolled(x, tcsc_from_dense(w), b, with(Variant::Unrolled, 12, 4)),
              oracle_gemm(x, w, b));
}

TEST(Unrolled, RejectsBadTiles) {
    const auto t = tcsc_from_dense(test::worked_w());
    EXPECT_THROW(gemm_unrolled(test::worked_x(), t, test::worked_bias(), with(Variant::Unrolled, 0)),
                 ParameterError);
    EXPECT_THROW(gemm_unrolled(test::worked_x(), t, test::worked_bias(), with(Variant::Unrolled, 4, 3)),
                 ParameterError);
    EXPECT_THROW(
        gemm_unrolled(test::worked_x(), t, test::worked_bias(), with(Variant::Unrolled, 4, 4, 8)),
        ParameterError);
}

TEST(Blocked, OversizedBlockSameOrderAsUnrolled) {
    const auto w = gen_ternary(150, 7, {1, 4}, 9);
    const auto x = gen_input_real(5, 150, 10);
    const auto b = gen_bias(7, 11);
    const auto cfg = with(Variant::Blocked, 4, 2);
    EXPECT_EQ(gemm_blocked(x, blocked_from_dense(w, 150), b, cfg),
              gemm_unrolled(x, tcsc_from_dense(w), b, cfg));
    EXPECT_EQ(gemm_blocked(x, blocked_from_dense(w, 1000), b, cfg),
              gemm_unrolled(x, tcsc_from_dense(w), b, cfg));
}

TEST(Blocked, LargeKWithDefaultBlock) {
    const std::size_t k = 16384;
    const auto w = gen_ternary(k, 8, {1, 4}, 12);
    const auto x = gen_input(3, k, 13);
    const auto b = gen_bias(8, 14);
    EXPECT_EQ(gemm_blocked(x, blocked_from_dense(w, 4096), b, with(Variant::Blocked)),
              oracle_gemm(x, w, b));
}

TEST(InterleavedBlocked, PositivesOnlyColumn) {
    TernaryDense w(10, 2);
    for (std::size_t r = 0; r < 10; r += 2)
        w(r, 0) = 1;
    w(3, 1) = -1;
    const auto x = gen_input(3, 10, 1);
    const auto b = gen_bias(2, 2);
    const auto t = interleaved_blocked_from_dense(w, 10, 2);
    EXPECT_TRUE(t.segments(0, 0).interleaved.empty());
    EXPECT_EQ(gemm_interleaved_blocked(x, t, b, with(Variant::InterleavedBlocked)),
              oracle_gemm(x, w, b));
}

TEST(Inverted, AllNegativeColumn) {
    TernaryDense w(6, 1, {-1, -1, -1, -1, -1, -1});
    const auto x = gen_input(2, 6, 3);
    const std::vector<float> b{0.5f};
    EXPECT_EQ(gemm_inverted(x, inverted_from_dense(w), b), oracle_gemm(x, w, b));
}

TEST(Compressed, ZeroWeightsAreAllNeutralCodes) {
    const TernaryDense w(7, 3);
    const auto t = compressed_from_dense(w);
    for (auto code : t.codes)
        EXPECT_EQ(code, 121);
    const auto x = gen_input(2, 7, 5);
    const std::vector<float> b{1, 2, 3};
    const auto y = gemm_compressed(x, t, b);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            EXPECT_EQ(y(r, c), b[c]);
}

TEST(Compressed, InvalidCodeRejected) {
    auto t = compressed_from_dense(test::worked_w());
    t.codes[1] = 247;
    EXPECT_THROW(gemm_compressed(test::worked_x(), t, test::worked_bias()), InvalidCodeError);
}

TEST(Kernels, ShapeMismatch) {
    const auto t = tcsc_from_dense(test::worked_w());
    EXPECT_THROW(gemm_base(DenseMatrix(1, 5), t, test::worked_bias()), ParameterError);
    EXPECT_THROW(gemm_base(test::worked_x(), t, std::vector<float>{1}), ParameterError);
}

TEST(OpCounts, BaseMatchesCostModel) {
    for (auto s : paper_sparsities()) {
        const std::size_t m = 3, k = 64, n = 10;
        const auto w = gen_ternary(k, n, s, 5);
        OpCounts counts;
        (void)gemm_base(gen_input(m, k, 6), tcsc_from_dense(w), gen_bias(n, 7), &counts);
        EXPECT_EQ(counts.adds, m * n + m * w.nnz());
        EXPECT_EQ(counts.adds, m * n * (1 + k * s.num / s.den));
        EXPECT_EQ(counts.mults, 0u);
    }
}

TEST(OpCounts, UnrolledAddsAccumulatorMerges) {
    const std::size_t m = 5, k = 90, n = 6, uf = 4;
    const auto w = gen_ternary(k, n, {1, 4}, 8);
    OpCounts counts;
    auto cfg = with(Variant::Unrolled, uf, 2);
    cfg.counts = &counts;
    (void)gemm_unrolled(gen_input(m, k, 1), tcsc_from_dense(w), gen_bias(n, 2), cfg);
    EXPECT_EQ(counts.adds, m * w.nnz() + m * n * 2 * uf);
    EXPECT_EQ(counts.mults, 0u);
}

TEST(OpCounts, InvertedAndCompressedMatchBase) {
    const std::size_t m = 2, k = 33, n = 4;
    const auto w = gen_ternary(k, n, {1, 2}, 3);
    const auto x = gen_input(m, k, 4);
    const auto b = gen_bias(n, 5);
    OpCounts inv, comp;
    (void)gemm_inverted(x, inverted_from_dense(w), b, &inv);
    (void)gemm_compressed(x, compressed_from_dense(w), b, &comp);
    EXPECT_EQ(inv.adds, m * n + m * w.nnz());
    EXPECT_EQ(comp, inv);
}

TEST(Variants, NamesRoundTrip) {
    for (auto v : all_variants())
        EXPECT_EQ(parse_variant(to_string(v)), v);
    EXPECT_THROW(parse_variant("fastest"), ParameterError);
    EXPECT_EQ(scalar_variants().size() + simd_variants().size(), all_variants().size());
}
