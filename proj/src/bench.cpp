#include "stgemm/bench.hpp"

#include "stgemm/error.hpp"
#include "stgemm/formats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

namespace stgemm {

std::uint64_t flop_count(std::uint64_t m, std::uint64_t k, std::uint64_t n, std::uint64_t nnz) {
    (void)k;
    return m * n + m * nnz;
}

double operational_intensity(std::uint64_t m, std::uint64_t k, std::uint64_t n,
                             std::uint64_t nnz, std::uint64_t format_bytes) {
    const std::uint64_t bytes = format_bytes + 4 * m * k + 4 * m * n + 4 * n;
    return static_cast<double>(flop_count(m, k, n, nnz)) / static_cast<double>(bytes);
}

namespace {

template <class Format, class Fn>
PreparedKernel bind(const GemmConfig &cfg, Format format, Fn fn) {
    auto shared = std::make_shared<const Format>(std::move(format));
    PreparedKernel out;
    out.cfg = cfg;
    out.format_bytes = stgemm::format_bytes(*shared);
    out.run = [shared, fn](const DenseMatrix &x, const PaddedInput &xp, std::span<const float> b,
                           OpCounts *counts) { return fn(*shared, x, xp, b, counts); };
    return out;
}

} // namespace

PreparedKernel prepare_kernel(const GemmConfig &cfg_in, const TernaryDense &w) {
    GemmConfig cfg = cfg_in;
    cfg.validate();
    cfg.block_size = cfg.resolved_block_size(w.rows);
    cfg.group = cfg.resolved_group();
    cfg.counts = nullptr;
    if (is_simd(cfg.variant) && w.cols % kLanes != 0)
        throw ParameterError("N must be divisible by 4 for vectorized kernels (got N = " +
                             std::to_string(w.cols) + ")");

    auto with_counts = [](GemmConfig c, OpCounts *counts) {
        c.counts = counts;
        return c;
    };

    switch (cfg.variant) {
    case Variant::Base:
        return bind(cfg, tcsc_from_dense(w),
                    [](const Tcsc &t, const DenseMatrix &x, const PaddedInput &,
                       std::span<const float> b, OpCounts *counts) {
                        return gemm_base(x, t, b, counts);
                    });
    case Variant::Unrolled:
        return bind(cfg, tcsc_from_dense(w),
                    [cfg, with_counts](const Tcsc &t, const DenseMatrix &x, const PaddedInput &,
                                       std::span<const float> b, OpCounts *counts) {
                        return gemm_unrolled(x, t, b, with_counts(cfg, counts));
                    });
    case Variant::Blocked:
        return bind(cfg, blocked_from_dense(w, cfg.block_size),
                    [cfg, with_counts](const BlockedTcsc &t, const DenseMatrix &x,
                                       const PaddedInput &, std::span<const float> b,
                                       OpCounts *counts) {
                        return gemm_blocked(x, t, b, with_counts(cfg, counts));
                    });
    case Variant::InterleavedBlocked:
        return bind(cfg, interleaved_blocked_from_dense(w, cfg.block_size, cfg.group),
                    [cfg, with_counts](const InterleavedBlockedTcsc &t, const DenseMatrix &x,
                                       const PaddedInput &, std::span<const float> b,
                                       OpCounts *counts) {
                        return gemm_interleaved_blocked(x, t, b, with_counts(cfg, counts));
                    });
    case Variant::Inverted:
        return bind(cfg, inverted_from_dense(w),
                    [](const InvertedTcsc &t, const DenseMatrix &x, const PaddedInput &,
                       std::span<const float> b, OpCounts *counts) {
                        return gemm_inverted(x, t, b, counts);
                    });
    case Variant::Compressed:
        return bind(cfg, compressed_from_dense(w),
                    [](const CompressedTcsc &t, const DenseMatrix &x, const PaddedInput &,
                       std::span<const float> b, OpCounts *counts) {
                        return gemm_compressed(x, t, b, counts);
                    });
    case Variant::Vertical:
        return bind(cfg, symmetric_from_dense(w, cfg.group),
                    [cfg](const SymmetricInterleavedTcsc &t, const DenseMatrix &,
                          const PaddedInput &xp, std::span<const float> b, OpCounts *counts) {
                        return gemm_vertical(xp, t, b, cfg.alpha, {SimdPath::Native, counts});
                    });
    case Variant::Horizontal:
        return bind(cfg, symmetric_from_dense(w, cfg.group),
                    [cfg](const SymmetricInterleavedTcsc &t, const DenseMatrix &,
                          const PaddedInput &xp, std::span<const float> b, OpCounts *counts) {
                        return gemm_horizontal(xp, t, b, cfg.alpha, {SimdPath::Native, counts});
                    });
    case Variant::VectorizedOptimal:
        return bind(cfg, interleaved_blocked_from_dense(w, cfg.block_size, cfg.group),
                    [cfg, with_counts](const InterleavedBlockedTcsc &t, const DenseMatrix &,
                                       const PaddedInput &xp, std::span<const float> b,
                                       OpCounts *counts) {
                        return gemm_vectorized_optimal(xp, t, b, cfg.alpha,
                                                       with_counts(cfg, counts));
                    });
    }
    throw ParameterError("unhandled kernel variant");
}

std::optional<Mismatch> first_mismatch(const DenseMatrix &expected, const DenseMatrix &actual,
                                       double rel_tol) {
    if (expected.rows != actual.rows || expected.cols != actual.cols)
        return Mismatch{0, 0, 0.0f, 0.0f};
    for (std::size_t r = 0; r < expected.rows; ++r)
        for (std::size_t c = 0; c < expected.cols; ++c) {
            const float e = expected(r, c);
            const float a = actual(r, c);
            const bool same =
                rel_tol == 0.0
                    ? e == a
                    : std::abs(static_cast<double>(a) - e) <=
                          rel_tol * std::max(1.0, std::abs(static_cast<double>(e)));
            if (!same)
                return Mismatch{r, c, e, a};
        }
    return std::nullopt;
}

void BenchPlan::validate() const {
    if (points.empty())
        throw ParameterError("benchmark plan has no points");
    if (repetitions < 3)
        throw ParameterError("benchmark plan needs at least 3 repetitions");
}

std::int64_t median_ns(std::vector<std::int64_t> samples) {
    if (samples.empty())
        throw ParameterError("median of an empty sample");
    auto mid = samples.begin() + static_cast<std::ptrdiff_t>((samples.size() - 1) / 2);
    std::nth_element(samples.begin(), mid, samples.end());
    return *mid;
}

void derive_rates(BenchRecord &rec, std::uint64_t nnz, std::optional<double> freq_ghz) {
    rec.flops = flop_count(rec.m, rec.k, rec.n, nnz);
    const double seconds = static_cast<double>(std::max<std::int64_t>(rec.median_ns, 1)) * 1e-9;
    rec.flops_per_sec = static_cast<double>(rec.flops) / seconds;
    if (freq_ghz)
        rec.flops_per_cycle = rec.flops_per_sec / (*freq_ghz * 1e9);
    else
        rec.flops_per_cycle.reset();
}

namespace {

/// Rows of Y checked against the dense oracle. All of them unless the dense product is
/// large; then the first 8 and the last 5, which cover full row tiles and every cleanup path.
std::vector<std::size_t> verification_rows(std::size_t m, std::size_t k, std::size_t n) {
    std::vector<std::size_t> rows;
    const bool small = static_cast<double>(m) * k * n <= 1u << 30;
    for (std::size_t r = 0; r < m; ++r)
        if (small || r < 8 || r + 5 >= m)
            rows.push_back(r);
    return rows;
}

DenseMatrix select_rows(const DenseMatrix &a, const std::vector<std::size_t> &rows) {
    DenseMatrix out(rows.size(), a.cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy_n(a.values.data() + rows[i] * a.cols, a.cols,
                    out.values.data() + i * a.cols);
    return out;
}

} // namespace

std::vector<BenchRecord> run_bench(const BenchPlan &plan, const KernelFactory &factory) {
    plan.validate();
    using clock = std::chrono::steady_clock;
    std::vector<BenchRecord> records;
    records.reserve(plan.points.size());
    for (std::size_t p = 0; p < plan.points.size(); ++p) {
        const auto &pt = plan.points[p];
        const std::uint64_t seed = plan.seed + 7919 * p;
        const auto w = gen_ternary(pt.k, pt.n, pt.sparsity, seed);
        const auto x = plan.inputs == InputKind::Integer ? gen_input(pt.m, pt.k, seed + 1)
                                                         : gen_input_real(pt.m, pt.k, seed + 1);
        const auto bias = gen_bias(pt.n, seed + 2);
        const auto xp = pad_input(x);

        PreparedKernel kernel = factory(pt.cfg, w);
        const auto alpha = is_simd(pt.cfg.variant) ? pt.cfg.alpha : std::nullopt;
        const auto got = kernel.run(x, xp, bias, nullptr);
        const auto rows = verification_rows(pt.m, pt.k, pt.n);
        const auto expected = oracle_gemm(select_rows(x, rows), w, bias, alpha);
        const double tol = plan.inputs == InputKind::Integer ? 0.0 : 1e-5;
        if (auto bad = first_mismatch(expected, select_rows(got, rows), tol))
            throw CorrectnessError(to_string(pt.cfg.variant) + " disagrees with the oracle at (" +
                                   std::to_string(rows[bad->row]) + ", " +
                                   std::to_string(bad->col) + "): expected " +
                                   std::to_string(bad->expected) + ", got " +
                                   std::to_string(bad->actual));

        for (std::size_t i = 0; i < plan.warmup; ++i)
            (void)kernel.run(x, xp, bias, nullptr);
        std::vector<std::int64_t> samples;
        samples.reserve(plan.repetitions);
        for (std::size_t i = 0; i < plan.repetitions; ++i) {
            const auto start = clock::now();
            auto y = kernel.run(x, xp, bias, nullptr);
            const auto stop = clock::now();
            samples.push_back(
                std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count());
        }

        BenchRecord rec;
        rec.variant = kernel.cfg.variant;
        rec.m = pt.m;
        rec.k = pt.k;
        rec.n = pt.n;
        rec.sparsity = pt.sparsity;
        rec.uf = kernel.cfg.inner_unroll;
        rec.mr = kernel.cfg.outer_rows;
        rec.nr = kernel.cfg.outer_cols;
        rec.block = kernel.cfg.block_size;
        rec.group = kernel.cfg.group;
        rec.reps = plan.repetitions;
        rec.median_ns = median_ns(std::move(samples));
        derive_rates(rec, w.nnz(), plan.freq_ghz);
        if (plan.instrument) {
            OpCounts counts;
            (void)kernel.run(x, xp, bias, &counts);
            rec.adds = counts.adds;
            rec.mults = counts.mults;
        }
        records.push_back(rec);
    }
    return records;
}

std::vector<VerifyOutcome> verify_configs(const std::vector<GemmConfig> &cfgs, std::size_t m,
                                          std::size_t k, std::size_t n, SparsityLevel s,
                                          std::uint64_t seed, bool inject_fault) {
    const auto w = gen_ternary(k, n, s, seed);
    const auto x = gen_input(m, k, seed + 1);
    const auto bias = gen_bias(n, seed + 2);
    const auto xp = pad_input(x);
    std::vector<VerifyOutcome> out;
    for (const auto &cfg : cfgs) {
        PreparedKernel kernel = prepare_kernel(cfg, w);
        auto got = kernel.run(x, xp, bias, nullptr);
        if (inject_fault && m > 0)
            got(m / 2, n / 2) += 1.0f;
        const auto alpha = is_simd(cfg.variant) ? cfg.alpha : std::nullopt;
        out.push_back({kernel.cfg, first_mismatch(oracle_gemm(x, w, bias, alpha), got)});
    }
    return out;
}

std::vector<OiCell> oi_table(std::size_t m, std::size_t n, const std::vector<std::size_t> &ks,
                             const std::vector<SparsityLevel> &levels) {
    std::vector<OiCell> out;
    for (auto k : ks)
        for (auto s : levels) {
            const std::uint64_t nnz = static_cast<std::uint64_t>(n) * s.nonzeros_per_column(k);
            OiCell cell;
            cell.k = k;
            cell.sparsity = s;
            cell.flops = flop_count(m, k, n, nnz);
            const std::uint64_t tcsc_bytes = 4 * (2 * (static_cast<std::uint64_t>(n) + 1) + nnz);
            cell.bytes = tcsc_bytes + 4 * static_cast<std::uint64_t>(m) * k + 4 * m * n + 4 * n;
            cell.oi = operational_intensity(m, k, n, nnz, tcsc_bytes);
            out.push_back(cell);
        }
    return out;
}

std::vector<GridBest> select_best(const std::vector<BenchRecord> &records) {
    std::vector<GridBest> best;
    for (const auto &rec : records) {
        auto it = std::find_if(best.begin(), best.end(),
                               [&](const GridBest &b) { return b.k == rec.k; });
        if (it == best.end())
            best.push_back({rec.k, rec.uf, rec.mr, rec.flops_per_sec});
        else if (rec.flops_per_sec > it->flops_per_sec)
            *it = {rec.k, rec.uf, rec.mr, rec.flops_per_sec};
    }
    return best;
}

GridResult grid_search(const GridSpec &spec, const KernelFactory &factory) {
    if (spec.ks.empty() || spec.unroll_factors.empty() || spec.outer_rows.empty())
        throw ParameterError("grid search needs non-empty K, UF and MR candidate lists");
    BenchPlan plan;
    plan.warmup = spec.warmup;
    plan.repetitions = spec.repetitions;
    plan.seed = spec.seed;
    plan.freq_ghz = spec.freq_ghz;
    for (auto k : spec.ks)
        for (auto uf : spec.unroll_factors)
            for (auto mr : spec.outer_rows) {
                BenchPoint pt;
                pt.cfg.variant = spec.variant;
                pt.cfg.inner_unroll = uf;
                pt.cfg.outer_rows = mr;
                pt.m = spec.m;
                pt.k = k;
                pt.n = spec.n;
                pt.sparsity = spec.sparsity;
                plan.points.push_back(pt);
            }
    GridResult result;
    result.records = run_bench(plan, factory);
    result.best = select_best(result.records);
    return result;
}

std::vector<std::size_t> k_sweep() { return {1024, 2048, 4096, 8192, 16384}; }

namespace {

BenchPlan sweep(const std::vector<Variant> &variants, const std::vector<SparsityLevel> &levels,
                const std::vector<std::size_t> &ks, std::size_t m, std::size_t n,
                const PresetOverrides &o) {
    BenchPlan plan;
    plan.warmup = o.warmup.value_or(plan.warmup);
    plan.repetitions = o.repetitions.value_or(plan.repetitions);
    plan.seed = o.seed.value_or(plan.seed);
    for (auto s : levels)
        for (auto v : variants)
            for (auto k : ks) {
                BenchPoint pt;
                pt.cfg.variant = v;
                if (is_simd(v))
                    pt.cfg.alpha = o.alpha.value_or(0.25f);
                pt.m = o.m.value_or(m);
                pt.k = k;
                pt.n = o.n.value_or(n);
                pt.sparsity = s;
                plan.points.push_back(pt);
            }
    return plan;
}

} // namespace

BenchPlan preset_plan(const std::string &name, const PresetOverrides &o) {
    if (name == "fig6")
        return sweep({Variant::Base, Variant::Unrolled, Variant::Blocked,
                      Variant::InterleavedBlocked},
                     {{1, 2}}, k_sweep(), 32, 1024, o);
    if (name == "fig8")
        return sweep({Variant::Base, Variant::InterleavedBlocked}, paper_sparsities(), k_sweep(),
                     64, 4096, o);
    if (name == "fig10") {
        std::vector<std::size_t> ks{512};
        for (auto k : k_sweep())
            ks.push_back(k);
        return sweep({Variant::Base, Variant::Vertical, Variant::Horizontal,
                      Variant::VectorizedOptimal},
                     {{1, 4}}, ks, 1024, 1024, o);
    }
    throw ParameterError("unknown preset '" + name + "' (expected fig6, fig8, fig10 or grid)");
}

GridSpec preset_grid(const PresetOverrides &o) {
    GridSpec spec;
    spec.ks = k_sweep();
    spec.m = o.m.value_or(32);
    spec.n = o.n.value_or(1024);
    spec.warmup = o.warmup.value_or(spec.warmup);
    spec.repetitions = o.repetitions.value_or(spec.repetitions);
    spec.seed = o.seed.value_or(spec.seed);
    return spec;
}

} // namespace stgemm
