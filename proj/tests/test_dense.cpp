#include "stgemm/dense.hpp"
#include "stgemm/error.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace stgemm;

namespace {

void expect_balanced_columns(const TernaryDense &w, SparsityLevel s) {
    const std::size_t nz = s.nonzeros_per_column(w.rows);
    for (std::size_t c = 0; c < w.cols; ++c) {
        std::size_t pos = 0, neg = 0;
        for (std::size_t r = 0; r < w.rows; ++r) {
            pos += w(r, c) == 1;
            neg += w(r, c) == -1;
        }
        EXPECT_EQ(pos + neg, nz);
        EXPECT_EQ(pos, (nz + 1) / 2);
        EXPECT_EQ(neg, nz / 2);
    }
}

} // namespace

TEST(Sparsity, ParsesFractionsAndIntegers) {
    EXPECT_EQ(SparsityLevel::parse("1/4"), SparsityLevel(1, 4));
    EXPECT_EQ(SparsityLevel::parse("1"), SparsityLevel(1, 1));
    EXPECT_EQ(SparsityLevel(3, 8).to_string(), "3/8");
    EXPECT_THROW(SparsityLevel::parse("0/4"), ParameterError);
    EXPECT_THROW(SparsityLevel::parse("5/4"), ParameterError);
    EXPECT_THROW(SparsityLevel::parse("a/b"), ParameterError);
    EXPECT_THROW(SparsityLevel::parse("1/0"), ParameterError);
}

TEST(Sparsity, NonzerosPerColumnRoundsHalfUp) {
    EXPECT_EQ(SparsityLevel(1, 4).nonzeros_per_column(8), 2u);
    EXPECT_EQ(SparsityLevel(1, 4).nonzeros_per_column(10), 3u);
    EXPECT_EQ(SparsityLevel(1, 4).nonzeros_per_column(9), 2u);
    EXPECT_EQ(SparsityLevel(1, 2).nonzeros_per_column(1), 1u);
    EXPECT_EQ(SparsityLevel(1, 1).nonzeros_per_column(7), 7u);
}

TEST(Sparsity, SweepLevels) {
    const auto levels = paper_sparsities();
    ASSERT_EQ(levels.size(), 4u);
    EXPECT_EQ(levels[0], SparsityLevel(1, 2));
    EXPECT_EQ(levels[3], SparsityLevel(1, 16));
}

TEST(GenTernary, HalfSparsityK4HasOneOfEachSign) {
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        expect_balanced_columns(gen_ternary(4, 1, {1, 2}, seed), {1, 2});
}

TEST(GenTernary, QuarterSparsityK8) {
    const auto w = gen_ternary(8, 3, {1, 4}, 7);
    expect_balanced_columns(w, {1, 4});
    EXPECT_EQ(w.nnz(), 6u);
}

TEST(GenTernary, FullDensityIsPermutationOfSigns) {
    const auto w = gen_ternary(2, 5, {1, 1}, 3);
    for (std::size_t c = 0; c < w.cols; ++c)
        EXPECT_EQ(w(0, c) + w(1, c), 0);
    EXPECT_EQ(w.nnz(), 10u);
}

TEST(GenTernary, DeterministicPerSeed) {
    EXPECT_EQ(gen_ternary(100, 9, {1, 8}, 5), gen_ternary(100, 9, {1, 8}, 5));
    EXPECT_NE(gen_ternary(100, 9, {1, 8}, 5), gen_ternary(100, 9, {1, 8}, 6));
}

TEST(GenTernary, RejectsEmptyShape) {
    EXPECT_THROW(gen_ternary(0, 3, {1, 2}, 1), ParameterError);
    EXPECT_THROW(gen_ternary(3, 0, {1, 2}, 1), ParameterError);
}

TEST(TernaryDense, RejectsNonTernary) {
    EXPECT_THROW(TernaryDense(1, 2, {1, 2}), ParameterError);
    EXPECT_THROW(TernaryDense(2, 2, {1, 0, 0}), ParameterError);
}

TEST(GenInput, SingleEntryInUnitRange) {
    const auto x = gen_input(1, 1, 9, 1);
    ASSERT_EQ(x.values.size(), 1u);
    EXPECT_GE(x(0, 0), -1.0f);
    EXPECT_LE(x(0, 0), 1.0f);
    EXPECT_EQ(x(0, 0), std::round(x(0, 0)));
}

TEST(GenInput, IntegralAndBounded) {
    const auto x = gen_input(2, 3, 4, 8);
    for (float v : x.values) {
        EXPECT_EQ(v, std::round(v));
        EXPECT_LE(std::abs(v), 8.0f);
    }
}

TEST(GenInput, Deterministic) {
    EXPECT_EQ(gen_input(5, 7, 11), gen_input(5, 7, 11));
    EXPECT_EQ(gen_input_real(5, 7, 11), gen_input_real(5, 7, 11));
}

TEST(DenseMatrix, RejectsNonFinite) {
    EXPECT_THROW(DenseMatrix(1, 1, std::vector<float>{std::numeric_limits<float>::infinity()}),
                 ParameterError);
    EXPECT_THROW(DenseMatrix(1, 1, std::vector<float>{std::nanf("")}), ParameterError);
    EXPECT_THROW(DenseMatrix(1, 2, std::vector<float>{1.0f}), ParameterError);
}

TEST(Prelu, Definition) {
    EXPECT_EQ(prelu(5.0f, 0.25f), 5.0f);
    EXPECT_EQ(prelu(-4.0f, 0.25f), -1.0f);
    EXPECT_EQ(prelu(0.0f, 0.25f), 0.0f);
}

TEST(Oracle, WorkedExample) {
    const auto y = oracle_gemm(test::worked_x(), test::worked_w(), test::worked_bias());
    EXPECT_EQ(y, DenseMatrix(1, 2, std::vector<float>{12, 18}));
}

TEST(Oracle, ZeroWeightsGiveBias) {
    const auto x = gen_input(3, 5, 1);
    const auto y = oracle_gemm(x, TernaryDense(5, 2), std::vector<float>{1.5f, -2.0f});
    for (std::size_t r = 0; r < 3; ++r) {
        EXPECT_EQ(y(r, 0), 1.5f);
        EXPECT_EQ(y(r, 1), -2.0f);
    }
}

TEST(Oracle, PreluOnNegativeOutput) {
    const auto y = oracle_gemm(test::worked_x(), test::worked_w(), std::vector<float>{10, 0}, 0.5f);
    EXPECT_EQ(y, DenseMatrix(1, 2, std::vector<float>{12, -1}));
}

TEST(Oracle, ShapeMismatch) {
    EXPECT_THROW(oracle_gemm(DenseMatrix(1, 3), test::worked_w(), test::worked_bias()),
                 ParameterError);
    EXPECT_THROW(oracle_gemm(test::worked_x(), test::worked_w(), std::vector<float>{1}),
                 ParameterError);
}
