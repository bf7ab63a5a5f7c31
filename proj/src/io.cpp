#include "stgemm/io.hpp"

#include "stgemm/error.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace stgemm {

namespace {

constexpr std::array<char, 4> kDenseMagic{'S', 'T', 'G', 'D'};
constexpr std::array<char, 4> kSparseMagic{'S', 'T', 'G', 'S'};
constexpr std::uint32_t kVersion = 1;

struct KindName {
    FormatKind kind;
    const char *name;
};

constexpr std::array<KindName, 7> kKindNames{{
    {FormatKind::Tcsc, "tcsc"},
    {FormatKind::Blocked, "blocked"},
    {FormatKind::Interleaved, "interleaved"},
    {FormatKind::InterleavedBlocked, "interleaved_blocked"},
    {FormatKind::Inverted, "inverted"},
    {FormatKind::Compressed, "compressed"},
    {FormatKind::Symmetric, "symmetric"},
}};

class Writer {
  public:
    void magic(const std::array<char, 4> &m) { tag(m.data()); }
    void tag(const char *t) { bytes_.insert(bytes_.end(), t, t + 4); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i)
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i8(std::int8_t v) { bytes_.push_back(static_cast<std::uint8_t>(v)); }

    template <class T>
    void section(const char *name, const std::vector<T> &values) {
        tag(name);
        u32(sizeof(T));
        u32(static_cast<std::uint32_t>(values.size()));
        for (auto v : values) {
            if constexpr (sizeof(T) == 1)
                bytes_.push_back(static_cast<std::uint8_t>(v));
            else
                u32(static_cast<std::uint32_t>(v));
        }
    }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

  private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
  public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }

    void need(std::size_t n, const char *what) const {
        if (bytes_.size() - pos_ < n)
            throw ParseError(std::string("truncated ") + what, pos_);
    }

    void expect_magic(const std::array<char, 4> &m, const char *what) {
        need(4, what);
        if (std::memcmp(bytes_.data() + pos_, m.data(), 4) != 0)
            throw ParseError(std::string("bad magic for ") + what, pos_);
        pos_ += 4;
    }

    std::uint32_t u32(const char *what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::int8_t i8(const char *what) {
        need(1, what);
        return static_cast<std::int8_t>(bytes_[pos_++]);
    }

    template <class T>
    std::vector<T> section(const char *name) {
        const std::size_t start = pos_;
        need(4, "section tag");
        if (std::memcmp(bytes_.data() + pos_, name, 4) != 0)
            throw ParseError(std::string("expected section ") + std::string(name, 4), start);
        pos_ += 4;
        const std::size_t width_at = pos_;
        if (u32("section width") != sizeof(T))
            throw ParseError(std::string("wrong element width in section ") +
                                 std::string(name, 4),
                             width_at);
        const std::uint32_t count = u32("section length");
        need(static_cast<std::size_t>(count) * sizeof(T), "section data");
        std::vector<T> out(count);
        for (auto &v : out) {
            if constexpr (sizeof(T) == 1)
                v = static_cast<T>(bytes_[pos_++]);
            else
                v = static_cast<T>(u32("section data"));
        }
        return out;
    }

    void expect_end() const {
        if (pos_ != bytes_.size())
            throw ParseError("trailing bytes after payload", pos_);
    }

  private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void write_tcsc_sections(Writer &w, const Tcsc &t) {
    w.section("CSTP", t.col_start_pos);
    w.section("RIDP", t.row_index_pos);
    w.section("CSTN", t.col_start_neg);
    w.section("RIDN", t.row_index_neg);
}

Tcsc read_tcsc_sections(Reader &r, std::size_t k, std::size_t n) {
    Tcsc t;
    t.k = k;
    t.n = n;
    t.col_start_pos = r.section<index_t>("CSTP");
    t.row_index_pos = r.section<index_t>("RIDP");
    t.col_start_neg = r.section<index_t>("CSTN");
    t.row_index_neg = r.section<index_t>("RIDN");
    return t;
}

struct Header {
    FormatKind kind;
    std::uint32_t k, n, block, group, sections;
};

} // namespace

std::string to_string(FormatKind kind) {
    for (const auto &e : kKindNames)
        if (e.kind == kind)
            return e.name;
    return "unknown";
}

FormatKind parse_format_kind(const std::string &name) {
    for (const auto &e : kKindNames)
        if (name == e.name)
            return e.kind;
    throw ParameterError("unknown sparse format '" + name + "'");
}

FormatKind kind_of(const SparseMatrix &s) {
    return static_cast<FormatKind>(s.index() + 1);
}

SparseMatrix encode_format(FormatKind kind, const TernaryDense &w, std::size_t block_size,
                           std::size_t group) {
    const std::size_t b = block_size ? block_size : default_block_size(w.rows);
    switch (kind) {
    case FormatKind::Tcsc: return tcsc_from_dense(w);
    case FormatKind::Blocked: return blocked_from_dense(w, b);
    case FormatKind::Interleaved: return interleaved_from_dense(w, group ? group : 4);
    case FormatKind::InterleavedBlocked:
        return interleaved_blocked_from_dense(w, b, group ? group : 4);
    case FormatKind::Inverted: return inverted_from_dense(w);
    case FormatKind::Compressed: return compressed_from_dense(w);
    case FormatKind::Symmetric: return symmetric_from_dense(w, group ? group : 2);
    }
    throw ParameterError("unknown sparse format");
}

TernaryDense to_dense(const SparseMatrix &s) {
    return std::visit(
        [](const auto &m) -> TernaryDense {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Tcsc>)
                return tcsc_to_dense(m);
            else
                return stgemm::to_dense(m);
        },
        s);
}

std::vector<std::uint8_t> serialize_dense(const TernaryDense &w) {
    Writer out;
    out.magic(kDenseMagic);
    out.u32(kVersion);
    out.u32(static_cast<std::uint32_t>(w.rows));
    out.u32(static_cast<std::uint32_t>(w.cols));
    for (auto v : w.values)
        out.i8(v);
    return out.take();
}

TernaryDense parse_dense(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    in.expect_magic(kDenseMagic, "dense ternary file");
    const std::size_t version_at = in.offset();
    if (in.u32("version") != kVersion)
        throw ParseError("unsupported version", version_at);
    const std::size_t dims_at = in.offset();
    const std::uint32_t k = in.u32("K");
    const std::uint32_t n = in.u32("N");
    if (k == 0 || n == 0)
        throw ParseError("K and N must be positive", dims_at);
    in.need(static_cast<std::size_t>(k) * n, "matrix values");
    std::vector<std::int8_t> values(static_cast<std::size_t>(k) * n);
    for (auto &v : values) {
        const std::size_t at = in.offset();
        v = in.i8("matrix values");
        if (v < -1 || v > 1)
            throw ParseError("entry outside {-1, 0, +1}", at);
    }
    in.expect_end();
    return TernaryDense(k, n, std::move(values));
}

std::vector<std::uint8_t> serialize_sparse(const SparseMatrix &s) {
    Writer out;
    out.magic(kSparseMagic);
    out.u32(kVersion);
    out.u32(static_cast<std::uint32_t>(kind_of(s)));
    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            out.u32(static_cast<std::uint32_t>(m.k));
            out.u32(static_cast<std::uint32_t>(m.n));
            if constexpr (std::is_same_v<T, Tcsc>) {
                out.u32(0);
                out.u32(0);
                out.u32(4);
                write_tcsc_sections(out, m);
            } else if constexpr (std::is_same_v<T, BlockedTcsc>) {
                out.u32(static_cast<std::uint32_t>(m.block_size));
                out.u32(0);
                out.u32(static_cast<std::uint32_t>(4 * m.blocks.size()));
                for (const auto &blk : m.blocks)
                    write_tcsc_sections(out, blk);
            } else if constexpr (std::is_same_v<T, InterleavedTcsc>) {
                out.u32(0);
                out.u32(static_cast<std::uint32_t>(m.group));
                out.u32(2);
                out.section("IDXS", m.all_indices);
                out.section("SEGP", m.col_segment_ptr);
            } else if constexpr (std::is_same_v<T, InterleavedBlockedTcsc>) {
                out.u32(static_cast<std::uint32_t>(m.block_size));
                out.u32(static_cast<std::uint32_t>(m.group));
                out.u32(2);
                out.section("IDXS", m.all_indices);
                out.section("SEGP", m.col_segment_ptr);
            } else if constexpr (std::is_same_v<T, InvertedTcsc>) {
                out.u32(0);
                out.u32(0);
                out.u32(2);
                out.section("CSTA", m.col_start);
                out.section("MIDX", m.merged_indices);
            } else if constexpr (std::is_same_v<T, CompressedTcsc>) {
                out.u32(static_cast<std::uint32_t>(m.codes_per_column));
                out.u32(0);
                out.u32(1);
                out.section("CODE", m.codes);
            } else {
                out.u32(0);
                out.u32(static_cast<std::uint32_t>(m.group));
                out.u32(3);
                out.section("CSTA", m.col_start);
                out.section("IDXS", m.all_indices);
                out.section("GPRS", m.group_pairs);
            }
        },
        s);
    return out.take();
}

SparseMatrix parse_sparse(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    in.expect_magic(kSparseMagic, "sparse ternary file");
    const std::size_t version_at = in.offset();
    if (in.u32("version") != kVersion)
        throw ParseError("unsupported version", version_at);
    const std::size_t tag_at = in.offset();
    const std::uint32_t tag = in.u32("format tag");
    if (tag < 1 || tag > kKindNames.size())
        throw ParseError("unknown format tag " + std::to_string(tag), tag_at);
    Header h{static_cast<FormatKind>(tag), 0, 0, 0, 0, 0};
    const std::size_t dims_at = in.offset();
    h.k = in.u32("K");
    h.n = in.u32("N");
    h.block = in.u32("block size");
    h.group = in.u32("group");
    const std::size_t count_at = in.offset();
    h.sections = in.u32("section count");
    if (h.k == 0 || h.n == 0)
        throw ParseError("K and N must be positive", dims_at);
    auto expect_sections = [&](std::uint32_t n) {
        if (h.sections != n)
            throw ParseError("expected " + std::to_string(n) + " sections, header says " +
                                 std::to_string(h.sections),
                             count_at);
    };

    SparseMatrix out;
    switch (h.kind) {
    case FormatKind::Tcsc:
        expect_sections(4);
        out = read_tcsc_sections(in, h.k, h.n);
        break;
    case FormatKind::Blocked: {
        if (h.block == 0)
            throw ParseError("block size must be positive", dims_at + 8);
        const std::size_t nb = num_blocks(h.k, h.block);
        expect_sections(static_cast<std::uint32_t>(4 * nb));
        BlockedTcsc b{h.k, h.n, h.block, {}};
        for (std::size_t i = 0; i < nb; ++i)
            b.blocks.push_back(read_tcsc_sections(in, h.k, h.n));
        out = std::move(b);
        break;
    }
    case FormatKind::Interleaved: {
        expect_sections(2);
        InterleavedTcsc t{h.k, h.n, h.group, {}, {}};
        t.all_indices = in.section<index_t>("IDXS");
        t.col_segment_ptr = in.section<index_t>("SEGP");
        out = std::move(t);
        break;
    }
    case FormatKind::InterleavedBlocked: {
        if (h.block == 0)
            throw ParseError("block size must be positive", dims_at + 8);
        expect_sections(2);
        InterleavedBlockedTcsc t{h.k, h.n, h.block, h.group, {}, {}};
        t.all_indices = in.section<index_t>("IDXS");
        t.col_segment_ptr = in.section<index_t>("SEGP");
        out = std::move(t);
        break;
    }
    case FormatKind::Inverted: {
        expect_sections(2);
        InvertedTcsc t{h.k, h.n, {}, {}};
        t.col_start = in.section<index_t>("CSTA");
        t.merged_indices = in.section<std::int32_t>("MIDX");
        out = std::move(t);
        break;
    }
    case FormatKind::Compressed: {
        expect_sections(1);
        CompressedTcsc t{h.k, h.n, h.block, {}};
        t.codes = in.section<std::uint8_t>("CODE");
        out = std::move(t);
        break;
    }
    case FormatKind::Symmetric: {
        expect_sections(3);
        SymmetricInterleavedTcsc t{h.k, h.n, h.group, {}, {}, {}};
        t.col_start = in.section<index_t>("CSTA");
        t.all_indices = in.section<index_t>("IDXS");
        t.group_pairs = in.section<index_t>("GPRS");
        out = std::move(t);
        break;
    }
    }
    in.expect_end();
    return out;
}

bool looks_like_dense(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 4 && std::memcmp(bytes.data(), kDenseMagic.data(), 4) == 0;
}

bool looks_like_sparse(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 4 && std::memcmp(bytes.data(), kSparseMagic.data(), 4) == 0;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path &path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("failed writing " + path.string());
}

} // namespace stgemm
