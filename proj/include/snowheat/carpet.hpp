#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "snowheat/error.hpp"
#include "snowheat/geometry.hpp"

namespace snowheat {

/// m x n 0/1 pattern, rows indexed from the bottom.
struct Pattern {
    int m = 0;  // rows
    int n = 0;  // columns
    std::vector<std::vector<std::uint8_t>> cells;  // cells[row][col]

    int at(int row, int col) const { return cells[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]; }

    int row_count(int row) const {
        int r = 0;
        for (int c = 0; c < n; ++c) r += at(row, c);
        return r;
    }

    std::vector<int> row_counts() const {
        std::vector<int> r(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) r[static_cast<std::size_t>(j)] = row_count(j);
        return r;
    }

    /// Exactly one chosen rectangle per column.
    bool one_per_column() const {
        for (int c = 0; c < n; ++c) {
            int k = 0;
            for (int j = 0; j < m; ++j) k += at(j, c);
            if (k != 1) return false;
        }
        return true;
    }

    /// Row chosen in column c (requires one_per_column).
    int chosen_row(int c) const {
        for (int j = 0; j < m; ++j)
            if (at(j, c)) return j;
        return -1;
    }

    /// Parses "0111;1000": rows top to bottom, separated by ';'.
    static Pattern parse(const std::string& text) {
        std::vector<std::string> rows;
        std::string cur;
        for (char ch : text) {
            if (ch == ';') {
                rows.push_back(cur);
                cur.clear();
            } else if (ch == '0' || ch == '1') {
                cur += ch;
            } else if (ch != ' ') {
                throw InvalidParameter(std::string("pattern: unexpected character '") + ch + "'");
            }
        }
        rows.push_back(cur);
        Pattern p;
        p.m = static_cast<int>(rows.size());
        p.n = static_cast<int>(rows.front().size());
        for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
            if (static_cast<int>(it->size()) != p.n) throw InvalidParameter("pattern: rows differ in length");
            std::vector<std::uint8_t> row;
            for (char ch : *it) row.push_back(ch == '1');
            p.cells.push_back(std::move(row));
        }
        p.validate();
        return p;
    }

    /// Builds from rows listed bottom to top.
    static Pattern from_rows(std::vector<std::vector<std::uint8_t>> bottom_up) {
        Pattern p;
        p.m = static_cast<int>(bottom_up.size());
        p.n = p.m ? static_cast<int>(bottom_up.front().size()) : 0;
        p.cells = std::move(bottom_up);
        for (const auto& r : p.cells)
            if (static_cast<int>(r.size()) != p.n) throw InvalidParameter("pattern: rows differ in length");
        p.validate();
        return p;
    }

    std::string to_string() const {
        std::string s;
        for (int j = m - 1; j >= 0; --j) {
            for (int c = 0; c < n; ++c) s += at(j, c) ? '1' : '0';
            if (j) s += ';';
        }
        return s;
    }

    void validate() const {
        if (m < 2) throw InvalidParameter("pattern: need at least two rows");
        if (m >= n) throw InvalidParameter("pattern: need fewer rows than columns (m < n)");
        int total = 0;
        for (int j = 0; j < m; ++j) total += row_count(j);
        if (total == 0) throw InvalidParameter("pattern: no chosen rectangle");
    }
};

/// The pattern A of the examples: rows bottom to top (1,0,0,0), (0,1,1,1).
inline Pattern pattern_A() { return Pattern::parse("0111;1000"); }

struct CarpetDims {
    double hausdorff = 0.0;
    double minkowski = 0.0;
};

inline CarpetDims carpet_dims(const Pattern& p) {
    p.validate();
    const double m = p.m, n = p.n;
    const double e = std::log(m) / std::log(n);
    double hs = 0.0, total = 0.0;
    for (int r : p.row_counts()) {
        if (r > 0) hs += std::pow(static_cast<double>(r), e);
        total += r;
    }
    return {std::log(hs) / std::log(m), 1.0 + std::log(total / m) / std::log(n)};
}

namespace detail {

// Orientation of each child for a plain parent: true = reflected. Throws if
// the pattern cannot be threaded into a continuous graph.
inline std::vector<bool> carpet_child_flips(const Pattern& p) {
    if (!p.one_per_column()) throw InvalidParameter("pattern is not curve-compatible: need one 1 per column");
    std::vector<bool> flips(static_cast<std::size_t>(p.n));
    int entry = 0;  // height in units of 1/m
    for (int c = 0; c < p.n; ++c) {
        const int row = p.chosen_row(c);
        if (entry == row) {
            flips[static_cast<std::size_t>(c)] = false;
            entry = row + 1;
        } else if (entry == row + 1) {
            flips[static_cast<std::size_t>(c)] = true;
            entry = row;
        } else {
            throw InvalidParameter("pattern is not curve-compatible: column " + std::to_string(c) +
                                   " does not continue the graph");
        }
    }
    if (entry != p.m) throw InvalidParameter("pattern is not curve-compatible: graph does not end at height 1");
    return flips;
}

}  // namespace detail

/// Level-k approximation of the graph of f on [0,1]: n^k segments through the
/// entry/exit corners of the level-k cells. A plain cell runs bottom-left to
/// top-right with the pattern, a reflected cell top-left to bottom-right with
/// the column-reversed pattern; each child's orientation is the one whose
/// entry corner continues the graph.
inline Polyline carpet_curve(const Pattern& p, int level, std::size_t cap = 100'000'000) {
    const std::vector<bool> flips = detail::carpet_child_flips(p);
    if (level < 0) throw InvalidParameter("carpet_curve: level must be >= 0");
    double count = std::pow(static_cast<double>(p.n), level);
    if (count > static_cast<double>(cap)) throw ResourceCap("carpet_curve: level too deep for the segment cap");

    struct Cell {
        double y0;
        bool reflected;
    };
    std::vector<Cell> cells{{0.0, false}};
    double height = 1.0;
    for (int k = 0; k < level; ++k) {
        const double ch = height / p.m;
        std::vector<Cell> next;
        next.reserve(cells.size() * static_cast<std::size_t>(p.n));
        for (const Cell& cell : cells) {
            for (int c = 0; c < p.n; ++c) {
                // a reflected parent is the mirror image of a plain one
                const int col = cell.reflected ? p.n - 1 - c : c;
                const int row = p.chosen_row(col);
                const bool flip = flips[static_cast<std::size_t>(col)] != cell.reflected;
                next.push_back({cell.y0 + row * ch, flip});
            }
        }
        cells = std::move(next);
        height = ch;
    }
    Polyline out;
    out.closed = false;
    const std::size_t N = cells.size();
    out.vertices.reserve(N + 1);
    for (std::size_t i = 0; i < N; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(N);
        out.vertices.push_back({x, cells[i].reflected ? cells[i].y0 + height : cells[i].y0});
    }
    const Cell& last = cells.back();
    out.vertices.push_back({1.0, last.reflected ? last.y0 : last.y0 + height});
    return out;
}

/// Jordan domain under g(t) = 1 + f(t) on [0,1], 3 - f(2-t) on (1,2], closed
/// by the segments on x = 0, y = 0 and x = 2. Counter-clockwise.
inline Polyline carpet_domain(const Pattern& p, int level, std::size_t cap = 100'000'000) {
    const Polyline f = carpet_curve(p, level, cap / 2);
    const std::size_t N = f.vertices.size() - 1;
    Polyline d;
    d.closed = true;
    d.vertices.reserve(2 * N + 3);
    d.vertices.push_back({0.0, 0.0});
    d.vertices.push_back({2.0, 0.0});
    for (std::size_t j = 0; j <= N; ++j) d.vertices.push_back({2.0 - f.vertices[j].x, 3.0 - f.vertices[j].y});
    for (std::size_t j = N; j-- > 0;) d.vertices.push_back({f.vertices[j].x, 1.0 + f.vertices[j].y});
    return d;
}

}  // namespace snowheat
