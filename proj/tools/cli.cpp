#include "cli.hpp"

#include "stgemm/bench.hpp"
#include "stgemm/error.hpp"
#include "stgemm/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace stgemm::cli {

namespace {

struct Options {
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t n = 0;
    std::vector<std::size_t> ks;
    std::string sparsity = "1/4";
    std::vector<std::string> sparsities;
    std::uint64_t seed = 42;
    std::vector<std::string> variants;
    std::size_t block = 0;
    std::size_t group = 0;
    std::vector<std::size_t> unroll{12};
    std::vector<std::size_t> outer_rows{4};
    std::size_t reps = 5;
    std::size_t warmup = 2;
    double freq_ghz = 0.0;
    float alpha = 0.25f;
    std::string in;
    std::string out;
    std::string format;
    std::string preset;
    bool instrument = false;
    bool inject_fault = false;
};

template <class T>
std::optional<T> if_given(const CLI::App &app, const std::string &name, const T &value) {
    const auto *opt = app.get_option_no_throw(name);
    if (opt && opt->count() > 0)
        return value;
    return std::nullopt;
}

/// Writes to --out when given, otherwise to `out`.
void emit(const Options &o, std::ostream &out, const std::function<void(std::ostream &)> &fn) {
    if (o.out.empty()) {
        fn(out);
        return;
    }
    std::ofstream file(o.out);
    if (!file)
        throw std::runtime_error("cannot write " + o.out);
    fn(file);
    if (!file)
        throw std::runtime_error("failed writing " + o.out);
}

TernaryDense load_matrix(const std::string &path) {
    const auto bytes = read_file(path);
    if (looks_like_dense(bytes))
        return parse_dense(bytes);
    if (looks_like_sparse(bytes))
        return to_dense(parse_sparse(bytes));
    throw ParseError("unrecognized file magic", 0);
}

GemmConfig base_config(const CLI::App &app, const Options &o, Variant v) {
    GemmConfig cfg;
    cfg.variant = v;
    cfg.inner_unroll = o.unroll.front();
    cfg.outer_rows = o.outer_rows.front();
    cfg.block_size = o.block;
    cfg.group = o.group;
    if (is_simd(v))
        cfg.alpha = if_given(app, "--alpha", o.alpha);
    return cfg;
}

std::vector<Variant> requested_variants(const Options &o, std::vector<Variant> fallback) {
    if (o.variants.empty())
        return fallback;
    std::vector<Variant> out;
    for (const auto &name : o.variants)
        out.push_back(parse_variant(name));
    return out;
}

std::optional<double> frequency(const CLI::App &app, const Options &o) {
    if (auto f = if_given(app, "--freq-ghz", o.freq_ghz)) {
        if (*f <= 0.0)
            throw ParameterError("--freq-ghz must be positive");
        return f;
    }
    return std::nullopt;
}

int cmd_gen(const Options &o) {
    const auto w = gen_ternary(o.k, o.n, SparsityLevel::parse(o.sparsity), o.seed);
    if (o.format.empty() || o.format == "dense")
        write_file(o.out, serialize_dense(w));
    else
        write_file(o.out, serialize_sparse(
                              encode_format(parse_format_kind(o.format), w, o.block, o.group)));
    return kOk;
}

int cmd_convert(const Options &o) {
    const auto w = load_matrix(o.in);
    if (o.format == "dense")
        write_file(o.out, serialize_dense(w));
    else
        write_file(o.out, serialize_sparse(
                              encode_format(parse_format_kind(o.format), w, o.block, o.group)));
    return kOk;
}

int cmd_verify(const CLI::App &app, const Options &o, std::ostream &out) {
    std::vector<GemmConfig> cfgs;
    for (auto v : requested_variants(o, all_variants()))
        cfgs.push_back(base_config(app, o, v));
    const auto results = verify_configs(
        cfgs, if_given(app, "--M", o.m).value_or(13), if_given(app, "--K", o.k).value_or(300),
        if_given(app, "--N", o.n).value_or(16), SparsityLevel::parse(o.sparsity), o.seed,
        o.inject_fault);
    bool ok = true;
    for (const auto &r : results) {
        if (!r.mismatch) {
            out << "PASS " << to_string(r.cfg.variant) << '\n';
            continue;
        }
        ok = false;
        char line[160];
        std::snprintf(line, sizeof line, "(%zu, %zu): expected %.9g, got %.9g", r.mismatch->row,
                      r.mismatch->col, static_cast<double>(r.mismatch->expected),
                      static_cast<double>(r.mismatch->actual));
        out << "FAIL " << to_string(r.cfg.variant) << " first difference at " << line << '\n';
    }
    return ok ? kOk : kVerifyFailed;
}

PresetOverrides overrides(const CLI::App &app, const Options &o) {
    PresetOverrides ov;
    ov.m = if_given(app, "--M", o.m);
    ov.n = if_given(app, "--N", o.n);
    ov.warmup = if_given(app, "--warmup", o.warmup);
    ov.repetitions = if_given(app, "--reps", o.reps);
    ov.seed = if_given(app, "--seed", o.seed);
    ov.alpha = if_given(app, "--alpha", o.alpha);
    return ov;
}

void write_grid(const GridResult &result, const Options &o, std::ostream &out,
                std::ostream &err) {
    emit(o, out, [&](std::ostream &s) { write_csv(s, result.records); });
    for (const auto &b : result.best)
        err << "best K=" << b.k << " UF=" << b.uf << " MR=" << b.mr << '\n';
}

int cmd_bench(const CLI::App &app, const Options &o, std::ostream &out, std::ostream &err) {
    if (o.preset == "grid") {
        auto spec = preset_grid(overrides(app, o));
        spec.freq_ghz = frequency(app, o);
        write_grid(grid_search(spec), o, out, err);
        return kOk;
    }
    BenchPlan plan;
    if (!o.preset.empty()) {
        plan = preset_plan(o.preset, overrides(app, o));
    } else {
        if (o.k == 0)
            throw ParameterError("bench needs --K or --preset");
        plan.warmup = o.warmup;
        plan.repetitions = o.reps;
        plan.seed = o.seed;
        for (auto v : requested_variants(o, {Variant::Base})) {
            BenchPoint pt;
            pt.cfg = base_config(app, o, v);
            pt.m = if_given(app, "--M", o.m).value_or(32);
            pt.k = o.k;
            pt.n = if_given(app, "--N", o.n).value_or(1024);
            pt.sparsity = SparsityLevel::parse(o.sparsity);
            plan.points.push_back(pt);
        }
    }
    plan.freq_ghz = frequency(app, o);
    plan.instrument = o.instrument;
    const auto records = run_bench(plan);
    emit(o, out, [&](std::ostream &s) { write_csv(s, records); });
    return kOk;
}

int cmd_gridsearch(const CLI::App &app, const Options &o, std::ostream &out,
                   std::ostream &err) {
    GridSpec spec = preset_grid(overrides(app, o));
    if (!o.ks.empty())
        spec.ks = o.ks;
    if (if_given(app, "--UF", 0))
        spec.unroll_factors = o.unroll;
    if (if_given(app, "--MR", 0))
        spec.outer_rows = o.outer_rows;
    if (if_given(app, "--s", 0))
        spec.sparsity = SparsityLevel::parse(o.sparsity);
    spec.freq_ghz = frequency(app, o);
    write_grid(grid_search(spec), o, out, err);
    return kOk;
}

int cmd_oi(const CLI::App &app, const Options &o, std::ostream &out) {
    std::vector<SparsityLevel> levels;
    for (const auto &s : o.sparsities)
        levels.push_back(SparsityLevel::parse(s));
    if (levels.empty())
        levels = paper_sparsities();
    const auto cells = oi_table(if_given(app, "--M", o.m).value_or(64),
                                if_given(app, "--N", o.n).value_or(1024),
                                o.ks.empty() ? k_sweep() : o.ks, levels);
    emit(o, out, [&](std::ostream &s) {
        s << "K,sparsity,flops,bytes,oi\n";
        for (const auto &c : cells) {
            char oi[32];
            std::snprintf(oi, sizeof oi, "%.6f", c.oi);
            s << c.k << ',' << c.sparsity.to_string() << ',' << c.flops << ',' << c.bytes << ','
              << oi << '\n';
        }
    });
    return kOk;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Sparse ternary GEMM: generate, convert, verify and benchmark", "stgemm"};
    app.require_subcommand(1);
    Options o;
    const auto positive = CLI::PositiveNumber;

    auto *gen = app.add_subcommand("gen", "Write a random ternary matrix");
    gen->add_option("--K", o.k, "rows of W")->required()->check(positive);
    gen->add_option("--N", o.n, "columns of W")->required()->check(positive);
    gen->add_option("--s", o.sparsity, "nonzero fraction, num/den");
    gen->add_option("--seed", o.seed);
    gen->add_option("--format", o.format, "dense (default) or a sparse format name");
    gen->add_option("--B", o.block, "block size");
    gen->add_option("--g", o.group, "interleave group");
    gen->add_option("--out", o.out)->required();

    auto *convert = app.add_subcommand("convert", "Rewrite a matrix file in another format");
    convert->add_option("--in", o.in)->required();
    convert->add_option("--out", o.out)->required();
    convert->add_option("--format", o.format,
                        "dense, tcsc, blocked, interleaved, interleaved_blocked, inverted, "
                        "compressed or symmetric")
        ->required();
    convert->add_option("--B", o.block, "block size");
    convert->add_option("--g", o.group, "interleave group");

    auto *verify = app.add_subcommand("verify", "Check kernels against the reference GEMM");
    verify->add_option("--M", o.m, "default 13")->check(positive);
    verify->add_option("--K", o.k, "default 300")->check(positive);
    verify->add_option("--N", o.n, "default 16")->check(positive);
    verify->add_option("--s", o.sparsity);
    verify->add_option("--seed", o.seed);
    verify->add_option("--variant", o.variants, "kernel to check (repeatable; default all)");
    verify->add_option("--UF", o.unroll)->expected(1);
    verify->add_option("--MR", o.outer_rows)->expected(1);
    verify->add_option("--B", o.block);
    verify->add_option("--g", o.group);
    verify->add_option("--alpha", o.alpha, "PReLU slope for vectorized kernels");
    verify->add_flag("--inject-fault", o.inject_fault)->group("");

    auto *bench = app.add_subcommand("bench", "Time kernels and print CSV");
    bench->add_option("--preset", o.preset, "fig6, fig8, fig10 or grid");
    bench->add_option("--M", o.m)->check(positive);
    bench->add_option("--K", o.k)->check(positive);
    bench->add_option("--N", o.n)->check(positive);
    bench->add_option("--s", o.sparsity);
    bench->add_option("--seed", o.seed);
    bench->add_option("--variant", o.variants, "kernel to time (repeatable; default base)");
    bench->add_option("--UF", o.unroll)->expected(1);
    bench->add_option("--MR", o.outer_rows)->expected(1);
    bench->add_option("--B", o.block);
    bench->add_option("--g", o.group);
    bench->add_option("--reps", o.reps);
    bench->add_option("--warmup", o.warmup);
    bench->add_option("--freq-ghz", o.freq_ghz, "nominal clock for flops/cycle");
    bench->add_option("--alpha", o.alpha, "PReLU slope for vectorized kernels");
    bench->add_flag("--instrument", o.instrument, "also record add/mult counts");
    bench->add_option("--out", o.out);

    auto *grid = app.add_subcommand("gridsearch", "Sweep unroll factors and print CSV");
    grid->add_option("--M", o.m)->check(positive);
    grid->add_option("--K", o.ks, "K values (repeatable)")->check(positive);
    grid->add_option("--N", o.n)->check(positive);
    grid->add_option("--s", o.sparsity);
    grid->add_option("--seed", o.seed);
    grid->add_option("--UF", o.unroll, "unroll factors (repeatable)");
    grid->add_option("--MR", o.outer_rows, "row tiles (repeatable)");
    grid->add_option("--reps", o.reps);
    grid->add_option("--warmup", o.warmup);
    grid->add_option("--freq-ghz", o.freq_ghz);
    grid->add_option("--out", o.out);

    auto *oi = app.add_subcommand("oi", "Print the operational-intensity table");
    oi->add_option("--M", o.m)->check(positive);
    oi->add_option("--K", o.ks, "K values (repeatable)")->check(positive);
    oi->add_option("--N", o.n)->check(positive);
    oi->add_option("--s", o.sparsities, "sparsities (repeatable)");
    oi->add_option("--out", o.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen)
            return cmd_gen(o);
        if (*convert)
            return cmd_convert(o);
        if (*verify)
            return cmd_verify(*verify, o, out);
        if (*bench)
            return cmd_bench(*bench, o, out, err);
        if (*grid)
            return cmd_gridsearch(*grid, o, out, err);
        return cmd_oi(*oi, o, out);
    } catch (const CorrectnessError &e) {
        err << "error: " << e.what() << '\n';
        return kVerifyFailed;
    } catch (const ParameterError &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kIoOrParse;
    }
}

} // namespace stgemm::cli
