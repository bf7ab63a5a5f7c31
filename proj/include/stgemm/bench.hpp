#pragma once

#include "stgemm/dense.hpp"
#include "stgemm/kernels.hpp"
#include "stgemm/simd.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stgemm {

/// Additions of the baseline algorithm: one per stored nonzero per row of X, plus the bias.
/// Equals M*N*(1 + s*K) when nnz = s*K*N.
std::uint64_t flop_count(std::uint64_t m, std::uint64_t k, std::uint64_t n, std::uint64_t nnz);

/// flops / (format bytes + X + Y + b), every array counted once at 4 bytes per float.
double operational_intensity(std::uint64_t m, std::uint64_t k, std::uint64_t n,
                             std::uint64_t nnz, std::uint64_t format_bytes);

/// Nominal peaks of the target the kernels were tuned for, for context in reports.
inline constexpr double kScalarPeakFlopsPerCycle = 4.0;
inline constexpr double kVectorPeakFlopsPerCycle = 16.0;

/// A kernel bound to one encoded W. `run` takes both the plain and the padded view of X;
/// each variant reads the one it needs.
struct PreparedKernel {
    GemmConfig cfg;
    std::size_t format_bytes = 0;
    std::function<DenseMatrix(const DenseMatrix &, const PaddedInput &, std::span<const float>,
                              OpCounts *)>
        run;
};

/// Encodes W in the format `cfg.variant` consumes. Throws ParameterError for shapes the
/// variant cannot take (e.g. N % 4 != 0 for vectorized kernels).
PreparedKernel prepare_kernel(const GemmConfig &cfg, const TernaryDense &w);

using KernelFactory = std::function<PreparedKernel(const GemmConfig &, const TernaryDense &)>;

struct Mismatch {
    std::size_t row = 0;
    std::size_t col = 0;
    float expected = 0.0f;
    float actual = 0.0f;
};

/// First element where `actual` differs from `expected`. `rel_tol` 0 demands bit equality;
/// otherwise |a - e| <= rel_tol * max(1, |e|).
std::optional<Mismatch> first_mismatch(const DenseMatrix &expected, const DenseMatrix &actual,
                                       double rel_tol = 0.0);

struct BenchPoint {
    GemmConfig cfg;
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t n = 0;
    SparsityLevel sparsity;
};

enum class InputKind {
    /// Integer-valued floats; every kernel must match the oracle bit for bit.
    Integer,
    /// Uniform reals in [-1, 1); kernels must match within 1e-5 relative.
    Real,
};

struct BenchPlan {
    std::vector<BenchPoint> points;
    std::size_t warmup = 2;
    std::size_t repetitions = 5;
    std::uint64_t seed = 42;
    InputKind inputs = InputKind::Integer;
    /// Nominal clock for deriving flops/cycle; wall time only when absent.
    std::optional<double> freq_ghz;
    /// Run each point once more with operation counters attached.
    bool instrument = false;

    /// Throws ParameterError when repetitions < 3 or the plan is empty.
    void validate() const;
};

struct BenchRecord {
    Variant variant = Variant::Base;
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t n = 0;
    SparsityLevel sparsity;
    std::size_t uf = 0;
    std::size_t mr = 0;
    std::size_t nr = 0;
    std::size_t block = 0;
    std::size_t group = 0;
    std::size_t reps = 0;
    std::int64_t median_ns = 0;
    std::uint64_t flops = 0;
    double flops_per_sec = 0.0;
    std::optional<double> flops_per_cycle;
    std::optional<std::uint64_t> adds;
    std::optional<std::uint64_t> mults;

    friend bool operator==(const BenchRecord &, const BenchRecord &) = default;
};

/// Middle order statistic (lower middle for an even count).
std::int64_t median_ns(std::vector<std::int64_t> samples);

/// Fills the derived fields (flops, flops_per_sec, flops_per_cycle) from the timing.
void derive_rates(BenchRecord &rec, std::uint64_t nnz, std::optional<double> freq_ghz);

/// For each point: generate inputs from the seed, check the kernel against oracle_gemm once
/// (CorrectnessError on any mismatch), warm up, time the repetitions, keep the median.
std::vector<BenchRecord> run_bench(const BenchPlan &plan,
                                   const KernelFactory &factory = prepare_kernel);

struct VerifyOutcome {
    GemmConfig cfg;
    std::optional<Mismatch> mismatch;
};

/// Runs each configuration on one generated problem (integer X, seed-derived W and b) and
/// compares every element with oracle_gemm. `inject_fault` adds 1 to Y(M/2, N/2) of every
/// kernel result before the comparison.
std::vector<VerifyOutcome> verify_configs(const std::vector<GemmConfig> &cfgs, std::size_t m,
                                          std::size_t k, std::size_t n, SparsityLevel s,
                                          std::uint64_t seed, bool inject_fault = false);

struct OiCell {
    std::size_t k = 0;
    SparsityLevel sparsity;
    std::uint64_t flops = 0;
    std::uint64_t bytes = 0;
    double oi = 0.0;
};

/// TCSC operational intensity for every (K, s) pair, N * round(s*K) nonzeros.
std::vector<OiCell> oi_table(std::size_t m, std::size_t n, const std::vector<std::size_t> &ks,
                             const std::vector<SparsityLevel> &levels);

// ---------------------------------------------------------------------------
// Grid search over unroll factors

struct GridSpec {
    std::vector<std::size_t> ks;
    std::vector<std::size_t> unroll_factors{1, 2, 4, 8, 12, 16};
    std::vector<std::size_t> outer_rows{1, 2, 4};
    SparsityLevel sparsity{1, 4};
    std::size_t m = 32;
    std::size_t n = 1024;
    Variant variant = Variant::Unrolled;
    std::size_t warmup = 2;
    std::size_t repetitions = 5;
    std::uint64_t seed = 42;
    std::optional<double> freq_ghz;
};

struct GridBest {
    std::size_t k = 0;
    std::size_t uf = 0;
    std::size_t mr = 0;
    double flops_per_sec = 0.0;
};

struct GridResult {
    std::vector<BenchRecord> records;
    std::vector<GridBest> best;
};

/// Highest flops_per_sec per K; ties keep the earliest record.
std::vector<GridBest> select_best(const std::vector<BenchRecord> &records);

GridResult grid_search(const GridSpec &spec, const KernelFactory &factory = prepare_kernel);

// ---------------------------------------------------------------------------
// Presets and CSV

/// K from 1024 to 16384 in powers of two.
std::vector<std::size_t> k_sweep();

struct PresetOverrides {
    std::optional<std::size_t> m;
    std::optional<std::size_t> n;
    std::optional<std::size_t> warmup;
    std::optional<std::size_t> repetitions;
    std::optional<std::uint64_t> seed;
    std::optional<float> alpha;
};

/// "fig6", "fig8" and "fig10" sweeps. Throws ParameterError for other names.
BenchPlan preset_plan(const std::string &name, const PresetOverrides &overrides = {});
/// The unroll-factor grid ("grid").
GridSpec preset_grid(const PresetOverrides &overrides = {});

extern const char *const kCsvHeader;

void write_csv(std::ostream &out, std::span<const BenchRecord> records);
/// Throws ParseError (byte offset of the offending line) on schema violations.
std::vector<BenchRecord> read_csv(std::istream &in);

} // namespace stgemm
