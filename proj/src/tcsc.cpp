#include "stgemm/tcsc.hpp"

#include "stgemm/error.hpp"

namespace stgemm {

std::string to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::OffsetsLength: return "offsets length";
    case ViolationKind::OffsetsStart: return "offsets start";
    case ViolationKind::NonMonotonicOffsets: return "non-monotonic offsets";
    case ViolationKind::OffsetsEnd: return "offsets end";
    case ViolationKind::IndexOutOfRange: return "index out of range";
    case ViolationKind::UnsortedColumn: return "unsorted column";
    case ViolationKind::SignOverlap: return "sign overlap";
    }
    return "unknown";
}

Tcsc tcsc_from_dense(const TernaryDense &w) {
    Tcsc t;
    t.k = w.rows;
    t.n = w.cols;
    t.col_start_pos.reserve(w.cols + 1);
    t.col_start_neg.reserve(w.cols + 1);
    t.col_start_pos.push_back(0);
    t.col_start_neg.push_back(0);
    for (std::size_t c = 0; c < w.cols; ++c) {
        for (std::size_t r = 0; r < w.rows; ++r) {
            const auto v = w(r, c);
            if (v > 0)
                t.row_index_pos.push_back(static_cast<index_t>(r));
            else if (v < 0)
                t.row_index_neg.push_back(static_cast<index_t>(r));
        }
        t.col_start_pos.push_back(static_cast<index_t>(t.row_index_pos.size()));
        t.col_start_neg.push_back(static_cast<index_t>(t.row_index_neg.size()));
    }
    return t;
}

namespace {

void check_side(const Tcsc &t, const std::vector<index_t> &starts,
                const std::vector<index_t> &rows, const char *side,
                std::vector<Violation> &out) {
    auto report = [&](ViolationKind kind, std::string detail) {
        out.push_back({kind, std::string(side) + ": " + to_string(kind) + " (" + detail + ")"});
    };
    if (starts.size() != t.n + 1) {
        report(ViolationKind::OffsetsLength,
               "expected " + std::to_string(t.n + 1) + ", got " + std::to_string(starts.size()));
        return;
    }
    if (starts.front() != 0)
        report(ViolationKind::OffsetsStart, "first offset is " + std::to_string(starts.front()));
    bool monotonic = true;
    for (std::size_t j = 0; j < t.n; ++j) {
        if (starts[j + 1] < starts[j]) {
            report(ViolationKind::NonMonotonicOffsets, "column " + std::to_string(j));
            monotonic = false;
        }
    }
    if (static_cast<std::size_t>(starts.back()) != rows.size())
        report(ViolationKind::OffsetsEnd, "last offset " + std::to_string(starts.back()) +
                                              " but " + std::to_string(rows.size()) +
                                              " indices");
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= t.k)
            report(ViolationKind::IndexOutOfRange,
                   "entry " + std::to_string(i) + " = " + std::to_string(rows[i]));
    if (!monotonic || starts.front() != 0 ||
        static_cast<std::size_t>(starts.back()) != rows.size())
        return;
    for (std::size_t j = 0; j < t.n; ++j)
        for (auto i = starts[j] + 1; i < starts[j + 1]; ++i)
            if (rows[i] <= rows[i - 1]) {
                report(ViolationKind::UnsortedColumn, "column " + std::to_string(j));
                break;
            }
}

} // namespace

std::vector<Violation> validate(const Tcsc &t) {
    std::vector<Violation> out;
    check_side(t, t.col_start_pos, t.row_index_pos, "pos", out);
    check_side(t, t.col_start_neg, t.row_index_neg, "neg", out);
    if (!out.empty())
        return out;
    std::vector<std::size_t> seen(t.k, 0);
    for (std::size_t j = 0; j < t.n; ++j) {
        for (auto i = t.col_start_pos[j]; i < t.col_start_pos[j + 1]; ++i)
            seen[t.row_index_pos[i]] = j + 1;
        for (auto i = t.col_start_neg[j]; i < t.col_start_neg[j + 1]; ++i)
            if (seen[t.row_index_neg[i]] == j + 1) {
                out.push_back({ViolationKind::SignOverlap,
                               "sign overlap (row " + std::to_string(t.row_index_neg[i]) +
                                   ", column " + std::to_string(j) + ")"});
            }
    }
    return out;
}

TernaryDense tcsc_to_dense(const Tcsc &t) {
    auto problems = validate(t);
    if (!problems.empty())
        throw CorruptionError("invalid TCSC: " + problems.front().message);
    TernaryDense w(t.k, t.n);
    for (std::size_t j = 0; j < t.n; ++j) {
        for (auto i = t.col_start_pos[j]; i < t.col_start_pos[j + 1]; ++i)
            w(t.row_index_pos[i], j) = 1;
        for (auto i = t.col_start_neg[j]; i < t.col_start_neg[j + 1]; ++i)
            w(t.row_index_neg[i], j) = -1;
    }
    return w;
}

std::size_t format_bytes(const Tcsc &t) {
    return sizeof(index_t) * (t.col_start_pos.size() + t.col_start_neg.size() +
                              t.row_index_pos.size() + t.row_index_neg.size());
}

} // namespace stgemm
