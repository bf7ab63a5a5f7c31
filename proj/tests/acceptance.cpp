// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any gating line fails.

#include "stgemm/bench.hpp"
#include "stgemm/error.hpp"
#include "stgemm/formats.hpp"
#include "stgemm/io.hpp"
#include "stgemm/kernels.hpp"
#include "stgemm/simd.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace stgemm;

namespace {

constexpr std::size_t kScalarCases = 200;
constexpr double kScalarTimeLimitSeconds = 120.0;
constexpr std::size_t kSimdCases = 100;
constexpr std::size_t kSymmetricCases = 100;
constexpr double kOiExpected = 12.77;
constexpr double kOiTolerance = 0.01;
constexpr double kSoftSpeedup = 1.5;
constexpr float kAlpha = 0.25f;

int failures = 0;

void report(bool ok, const std::string &name, const std::string &detail, bool gating = true) {
    std::printf("%s %s: %s%s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str(),
                gating ? "" : " (informational)");
    if (!ok && gating)
        ++failures;
}

struct Shape {
    std::size_t m, k, n;
    SparsityLevel s;
    std::uint64_t seed;
};

class CaseGen {
  public:
    explicit CaseGen(std::uint64_t seed) : rng_(seed) {}

    std::size_t uniform(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }

    // K log-uniform in [16, 4096] so small and large K are equally represented.
    std::size_t k() {
        const double e = std::uniform_real_distribution<double>(4.0, 12.0)(rng_);
        return std::min<std::size_t>(4096, static_cast<std::size_t>(std::exp2(e)));
    }

    Shape shape(std::size_t n_multiple) {
        const auto levels = paper_sparsities();
        Shape s{};
        s.m = uniform(1, 9);
        s.k = k();
        s.n = n_multiple * uniform((4 + n_multiple - 1) / n_multiple, 64 / n_multiple);
        s.s = levels[uniform(0, 3)];
        s.seed = rng_();
        return s;
    }

  private:
    std::mt19937_64 rng_;
};

std::string describe(const Shape &c, const std::string &kernel) {
    std::ostringstream os;
    os << kernel << " M=" << c.m << " K=" << c.k << " N=" << c.n << " s=" << c.s.to_string()
       << " seed=" << c.seed;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void scalar_equivalence() {
    CaseGen gen(20240601);
    const auto start = std::chrono::steady_clock::now();
    std::size_t runs = 0;
    std::size_t mismatches = 0;
    std::string first;
    auto check = [&](const DenseMatrix &expected, const DenseMatrix &got, const Shape &c,
                     const std::string &kernel) {
        ++runs;
        if (first_mismatch(expected, got)) {
            if (mismatches++ == 0)
                first = describe(c, kernel);
        }
    };

    for (std::size_t i = 0; i < kScalarCases; ++i) {
        const Shape c = gen.shape(1);
        const auto w = gen_ternary(c.k, c.n, c.s, c.seed);
        const auto x = gen_input(c.m, c.k, c.seed + 1);
        const auto b = gen_bias(c.n, c.seed + 2);
        const auto expected = oracle_gemm(x, w, b);
        const auto t = tcsc_from_dense(w);

        check(expected, gemm_base(x, t, b), c, "base");
        GemmConfig cfg;
        for (std::size_t uf : {1, 2, 4, 8, 12, 16})
            for (std::size_t mr : {1, 2, 4})
                for (std::size_t nr : {1, 2, 4}) {
                    cfg.inner_unroll = uf;
                    cfg.outer_rows = mr;
                    cfg.outer_cols = nr;
                    check(expected, gemm_unrolled(x, t, b, cfg), c,
                          "unrolled UF=" + std::to_string(uf) + " MR=" + std::to_string(mr) +
                              " NR=" + std::to_string(nr));
                }
        cfg = GemmConfig{};
        const std::size_t block = gen.uniform(1, c.k + 8);
        const std::size_t group = std::size_t{1} << gen.uniform(0, 3);
        check(expected, gemm_blocked(x, blocked_from_dense(w, block), b, cfg), c,
              "blocked B=" + std::to_string(block));
        check(expected, gemm_blocked(x, blocked_from_dense(w, default_block_size(c.k)), b, cfg), c,
              "blocked default B");
        check(expected,
              gemm_interleaved_blocked(x, interleaved_blocked_from_dense(w, block, group), b, cfg),
              c, "interleaved_blocked B=" + std::to_string(block) + " g=" + std::to_string(group));
        check(expected, gemm_inverted(x, inverted_from_dense(w), b), c, "inverted");
        check(expected, gemm_compressed(x, compressed_from_dense(w), b), c, "compressed");
    }
    const double elapsed = seconds_since(start);
    std::ostringstream os;
    os << kScalarCases << " cases, " << runs << " kernel runs, " << mismatches << " mismatches, "
       << elapsed << " s (limit " << kScalarTimeLimitSeconds << " s)";
    if (mismatches)
        os << "; first: " << first;
    report(mismatches == 0 && elapsed < kScalarTimeLimitSeconds, "scalar oracle equivalence",
           os.str());
}

void simd_equivalence() {
    CaseGen gen(77001);
    std::size_t runs = 0;
    std::size_t mismatches = 0;
    std::size_t non_multiple_m = 0;
    std::string first;
    for (std::size_t i = 0; i < kSimdCases; ++i) {
        Shape c = gen.shape(kLanes);
        if (i % 2 == 0 && c.m % kLanes == 0)
            c.m += 1;
        non_multiple_m += c.m % kLanes != 0;
        const auto w = gen_ternary(c.k, c.n, c.s, c.seed);
        const auto x = gen_input(c.m, c.k, c.seed + 1);
        const auto b = gen_bias(c.n, c.seed + 2);
        const auto xp = pad_input(x);
        const std::size_t group = std::size_t{1} << gen.uniform(0, 2);
        const std::size_t block = gen.uniform(1, c.k + 8);
        const auto sym = symmetric_from_dense(w, group);
        const auto ib = interleaved_blocked_from_dense(w, block, group);
        GemmConfig cfg;
        cfg.inner_unroll = std::vector<std::size_t>{1, 2, 4, 8, 12, 16}[gen.uniform(0, 5)];
        for (std::optional<float> alpha : {std::optional<float>{}, std::optional<float>{kAlpha}}) {
            const auto expected = oracle_gemm(x, w, b, alpha);
            for (auto path : {SimdPath::Portable, SimdPath::Native}) {
                const std::string suffix = std::string(alpha ? " alpha=0.25" : " no-alpha") +
                                           (path == SimdPath::Native ? " native" : " portable") +
                                           " g=" + std::to_string(group);
                const std::pair<const char *, DenseMatrix> outs[] = {
                    {"vertical", gemm_vertical(xp, sym, b, alpha, {path, nullptr})},
                    {"horizontal", gemm_horizontal(xp, sym, b, alpha, {path, nullptr})},
                    {"vectorized_optimal", gemm_vectorized_optimal(xp, ib, b, alpha, cfg, path)},
                };
                for (const auto &[name, y] : outs) {
                    ++runs;
                    if (first_mismatch(expected, y) && mismatches++ == 0)
                        first = describe(c, name + suffix);
                }
            }
        }
    }
    std::ostringstream os;
    os << kSimdCases << " cases (" << non_multiple_m << " with M % 4 != 0), " << runs
       << " kernel runs, " << mismatches << " mismatches, native path "
       << (native_simd_available() ? "SIMD" : "portable fallback");
    if (mismatches)
        os << "; first: " << first;
    report(mismatches == 0 && non_multiple_m > 0, "SIMD oracle equivalence", os.str());
}

void format_round_trips() {
    std::vector<std::pair<std::string, TernaryDense>> cases{
        {"all-zero", TernaryDense(13, 8)},
        {"s=1", gen_ternary(10, 8, {1, 1}, 1)},
        {"K=1", gen_ternary(1, 4, {1, 1}, 2)},
        {"K mod 5 = 3", gen_ternary(23, 12, {1, 4}, 3)},
        {"worked", TernaryDense(4, 2, {1, 0, 0, -1, -1, 0, 1, 0})},
    };
    const auto levels = paper_sparsities();
    for (std::uint64_t i = 0; i < 60; ++i)
        cases.push_back({"random " + std::to_string(i),
                         gen_ternary(1 + i * 37 % 500, 4 * (1 + i % 6), levels[i % 4], 900 + i)});

    std::size_t checks = 0;
    std::string failure;
    auto expect = [&](bool ok, const std::string &what) {
        ++checks;
        if (!ok && failure.empty())
            failure = what;
    };
    for (const auto &[name, w] : cases) {
        expect(tcsc_to_dense(tcsc_from_dense(w)) == w, name + " tcsc");
        for (std::size_t b : {std::size_t{1}, std::size_t{4}, w.rows, w.rows + 100}) {
            expect(to_dense(blocked_from_dense(w, b)) == w, name + " blocked");
            for (std::size_t g : {1, 2, 4})
                expect(to_dense(interleaved_blocked_from_dense(w, b, g)) == w,
                       name + " interleaved_blocked");
        }
        for (std::size_t g : {1, 2, 3, 4})
            expect(to_dense(interleaved_from_dense(w, g)) == w, name + " interleaved");
        expect(to_dense(inverted_from_dense(w)) == w, name + " inverted");
        expect(to_dense(compressed_from_dense(w)) == w, name + " compressed");
        if (w.cols % kLanes == 0)
            for (std::size_t g : {1, 2, 4})
                expect(to_dense(symmetric_from_dense(w, g)) == w, name + " symmetric");
        for (FormatKind kind : {FormatKind::Tcsc, FormatKind::Blocked, FormatKind::Interleaved,
                                FormatKind::InterleavedBlocked, FormatKind::Inverted,
                                FormatKind::Compressed}) {
            const auto s = encode_format(kind, w);
            expect(to_dense(parse_sparse(serialize_sparse(s))) == w, name + " file " + to_string(kind));
        }
        expect(parse_dense(serialize_dense(w)) == w, name + " dense file");
    }

    std::size_t codes_ok = 0;
    for (unsigned code = 0; code < kBase3Codes; ++code)
        codes_ok += compress5(decompress5(static_cast<std::uint8_t>(code))) == code;
    expect(codes_ok == kBase3Codes, "compress5/decompress5 inverse");
    std::size_t rejected = 0;
    for (unsigned code = kBase3Codes; code < 256; ++code) {
        try {
            (void)decompress5(static_cast<std::uint8_t>(code));
        } catch (const InvalidCodeError &) {
            ++rejected;
        }
    }
    expect(rejected == 256 - kBase3Codes, "codes 243-255 rejected");

    std::ostringstream os;
    os << cases.size() << " matrices, " << checks << " checks, " << codes_ok
       << "/243 codes invert, " << rejected << "/13 invalid codes rejected";
    if (!failure.empty())
        os << "; first failure: " << failure;
    report(failure.empty(), "format round-trips", os.str());
}

void cost_model() {
    std::size_t checks = 0;
    std::string failure;
    const std::size_t m = 7, k = 1024, n = 48;
    for (auto s : paper_sparsities()) {
        const auto w = gen_ternary(k, n, s, 31 + s.den);
        OpCounts counts;
        (void)gemm_base(gen_input(m, k, 5), tcsc_from_dense(w), gen_bias(n, 6), &counts);
        const std::uint64_t by_nnz = m * n + m * w.nnz();
        const std::uint64_t closed_form = m * n * (1 + k * s.num / s.den);
        ++checks;
        if (counts.adds != by_nnz || counts.adds != closed_form || counts.mults != 0 ||
            flop_count(m, k, n, w.nnz()) != closed_form)
            failure = "s=" + s.to_string() + ": adds " + std::to_string(counts.adds) +
                      ", expected " + std::to_string(closed_form) + ", mults " +
                      std::to_string(counts.mults);
    }
    std::ostringstream os;
    os << checks << " sparsities at M=" << m << " K=" << k << " N=" << n
       << ", adds == M*N + M*nnz == M*N*(1+sK), mults == 0";
    if (!failure.empty())
        os << "; " << failure;
    report(failure.empty(), "cost-model conformance", os.str());
}

void symmetric_invariants() {
    CaseGen gen(5150);
    std::size_t groups = 0;
    std::size_t with_dummies = 0;
    std::size_t detected = 0;
    std::string failure;
    auto fail = [&](const std::string &what) {
        if (failure.empty())
            failure = what;
    };
    for (std::size_t i = 0; i < kSymmetricCases; ++i) {
        const Shape c = gen.shape(kLanes);
        const std::size_t group = std::size_t{1} << gen.uniform(0, 2);
        const auto w = gen_ternary(c.k, c.n, c.s, c.seed);
        const auto t = symmetric_from_dense(w, group);
        const std::string tag = describe(c, "symmetric g=" + std::to_string(group));

        std::size_t dummies = 0;
        for (std::size_t g0 = 0; g0 < c.n; g0 += kLanes) {
            ++groups;
            const auto pairs = t.group_pairs[g0 / kLanes];
            if (pairs % 4 != 0)
                fail(tag + ": pair count not a multiple of 4");
            for (std::size_t j = g0; j < g0 + kLanes; ++j) {
                const auto col = t.column(j);
                if (col.size() != 2 * static_cast<std::size_t>(pairs))
                    fail(tag + ": unequal counts inside a group");
                const std::size_t real = w.column_nnz(j);
                std::size_t at_k = 0;
                for (auto idx : col) {
                    if (idx == t.dummy_index())
                        ++at_k;
                    else if (idx < 0 || idx > t.dummy_index())
                        fail(tag + ": index outside [0, K]");
                }
                if (at_k + real != col.size())
                    fail(tag + ": padding entries other than K");
                dummies += at_k;
            }
        }
        if (dummies != t.dummy_count())
            fail(tag + ": dummy_count disagrees");
        if (to_dense(t) != w)
            fail(tag + ": decode differs");

        const auto x = gen_input(c.m, c.k, c.seed + 1);
        const auto b = gen_bias(c.n, c.seed + 2);
        auto xp = pad_input(x);
        const auto clean = gemm_vertical(xp, t, b, std::nullopt);
        if (first_mismatch(oracle_gemm(x, w, b), clean))
            fail(tag + ": dummy entries changed the result");
        // NaN cannot cancel between + and - padding, so any read of the slot shows up
        for (std::size_t r = 0; r < xp.rows; ++r)
            xp.row(r)[c.k] = std::nanf("");
        const bool changed = first_mismatch(clean, gemm_vertical(xp, t, b, std::nullopt)).has_value();
        if (dummies > 0) {
            ++with_dummies;
            detected += changed;
            if (!changed)
                fail(tag + ": perturbed dummy slot went unnoticed");
        } else if (changed) {
            fail(tag + ": output changed without dummies");
        }
    }
    std::ostringstream os;
    os << kSymmetricCases << " matrices, " << groups
       << " groups with equal multiple-of-4 counts, all padding == K; perturbing the padded "
          "slot changed the output in "
       << detected << "/" << with_dummies << " padded matrices";
    if (!failure.empty())
        os << "; first failure: " << failure;
    report(failure.empty() && with_dummies > 0, "symmetric-format invariants", os.str());
}

void oi_formula() {
    const std::size_t m = 64, k = 1024, n = 1024;
    const auto w = gen_ternary(k, n, {1, 2}, 1);
    const auto t = tcsc_from_dense(w);
    const double oi = operational_intensity(m, k, n, w.nnz(), format_bytes(t));
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "OI = %.6f flops/byte (flops %llu, format bytes %zu), expected %.2f +/- %.2f", oi,
                  static_cast<unsigned long long>(flop_count(m, k, n, w.nnz())), format_bytes(t),
                  kOiExpected, kOiTolerance);
    report(std::abs(oi - kOiExpected) <= kOiTolerance, "operational intensity", detail);
}

void soft_performance() {
    BenchPlan plan;
    for (auto v : {Variant::Base, Variant::InterleavedBlocked}) {
        BenchPoint pt;
        pt.cfg.variant = v;
        pt.m = 64;
        pt.k = 16384;
        pt.n = 1024;
        pt.sparsity = {1, 2};
        plan.points.push_back(pt);
    }
    plan.warmup = 2;
    plan.repetitions = 5;
    const auto recs = run_bench(plan);
    const double speedup = recs[1].flops_per_sec / recs[0].flops_per_sec;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "interleaved_blocked %.3g flops/s vs base %.3g flops/s at K=16384 s=1/2 M=64 "
                  "N=1024: %.2fx (threshold %.1fx)",
                  recs[1].flops_per_sec, recs[0].flops_per_sec, speedup, kSoftSpeedup);
    report(speedup >= kSoftSpeedup, "soft performance sanity", detail, false);
}

} // namespace

int main() {
    const std::vector<std::function<void()>> criteria{
        scalar_equivalence, simd_equivalence, format_round_trips, cost_model,
        symmetric_invariants, oi_formula, soft_performance,
    };
    for (const auto &run : criteria) {
        try {
            run();
        } catch (const std::exception &e) {
            std::printf("FAIL unexpected exception: %s\n", e.what());
            ++failures;
        }
    }
    std::printf("%d gating criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
