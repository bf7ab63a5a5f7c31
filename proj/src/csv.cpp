#include "stgemm/bench.hpp"
#include "stgemm/error.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace stgemm {

const char *const kCsvHeader = "variant,M,K,N,sparsity_num,sparsity_den,UF,MR,NR,B,g,reps,"
                               "median_ns,flops,flops_per_sec,flops_per_cycle,adds,mults";

namespace {

constexpr std::size_t kColumns = 18;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

template <class T>
T parse_int(std::string_view field, const char *name, std::size_t offset) {
    T out{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(std::string("bad integer in column ") + name, offset);
    return out;
}

double parse_double(std::string_view field, const char *name, std::size_t offset) {
    std::string text(field);
    char *end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size())
        throw ParseError(std::string("bad number in column ") + name, offset);
    return v;
}

} // namespace

void write_csv(std::ostream &out, std::span<const BenchRecord> records) {
    out << kCsvHeader << '\n';
    for (const auto &r : records) {
        out << to_string(r.variant) << ',' << r.m << ',' << r.k << ',' << r.n << ','
            << r.sparsity.num << ',' << r.sparsity.den << ',' << r.uf << ',' << r.mr << ','
            << r.nr << ',' << r.block << ',' << r.group << ',' << r.reps << ',' << r.median_ns
            << ',' << r.flops << ',' << format_double(r.flops_per_sec) << ',';
        if (r.flops_per_cycle)
            out << format_double(*r.flops_per_cycle);
        out << ',';
        if (r.adds)
            out << *r.adds;
        out << ',';
        if (r.mults)
            out << *r.mults;
        out << '\n';
    }
}

std::vector<BenchRecord> read_csv(std::istream &in) {
    std::vector<BenchRecord> out;
    std::string line;
    std::size_t offset = 0;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw ParseError("missing or unexpected CSV header", 0);
    offset += line.size() + 1;
    while (std::getline(in, line)) {
        const std::size_t here = offset;
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto f = split(line);
        if (f.size() != kColumns)
            throw ParseError("expected " + std::to_string(kColumns) + " fields, found " +
                                 std::to_string(f.size()),
                             here);
        BenchRecord r;
        try {
            r.variant = parse_variant(std::string(f[0]));
        } catch (const ParameterError &e) {
            throw ParseError(e.what(), here);
        }
        r.m = parse_int<std::size_t>(f[1], "M", here);
        r.k = parse_int<std::size_t>(f[2], "K", here);
        r.n = parse_int<std::size_t>(f[3], "N", here);
        try {
            r.sparsity = SparsityLevel(parse_int<std::uint32_t>(f[4], "sparsity_num", here),
                                       parse_int<std::uint32_t>(f[5], "sparsity_den", here));
        } catch (const ParameterError &e) {
            throw ParseError(e.what(), here);
        }
        r.uf = parse_int<std::size_t>(f[6], "UF", here);
        r.mr = parse_int<std::size_t>(f[7], "MR", here);
        r.nr = parse_int<std::size_t>(f[8], "NR", here);
        r.block = parse_int<std::size_t>(f[9], "B", here);
        r.group = parse_int<std::size_t>(f[10], "g", here);
        r.reps = parse_int<std::size_t>(f[11], "reps", here);
        r.median_ns = parse_int<std::int64_t>(f[12], "median_ns", here);
        r.flops = parse_int<std::uint64_t>(f[13], "flops", here);
        r.flops_per_sec = parse_double(f[14], "flops_per_sec", here);
        if (!f[15].empty())
            r.flops_per_cycle = parse_double(f[15], "flops_per_cycle", here);
        if (!f[16].empty())
            r.adds = parse_int<std::uint64_t>(f[16], "adds", here);
        if (!f[17].empty())
            r.mults = parse_int<std::uint64_t>(f[17], "mults", here);
        out.push_back(r);
    }
    return out;
}

} // namespace stgemm
