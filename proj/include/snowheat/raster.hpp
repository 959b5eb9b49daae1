#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "snowheat/geometry.hpp"
#include "snowheat/parallel.hpp"

namespace snowheat {

/// Uniform cell-centred grid. Cell (i, j) has centre (x0 + (i+½)h, y0 + (j+½)h).
struct Grid {
    double x0 = 0.0, y0 = 0.0, h = 1.0;
    std::size_t nx = 0, ny = 0;

    double cx(std::size_t i) const noexcept { return x0 + (static_cast<double>(i) + 0.5) * h; }
    double cy(std::size_t j) const noexcept { return y0 + (static_cast<double>(j) + 0.5) * h; }
    std::size_t cells() const noexcept { return nx * ny; }
};

/// Grid of pitch h covering `box` with at least `margin` cells of slack on
/// every side. The origin is snapped to a multiple of h so that grids of the
/// same pitch share cell boundaries.
inline Grid grid_covering(const Box& box, double h, std::size_t margin = 2) {
    Grid g;
    g.h = h;
    const double m = static_cast<double>(margin) * h;
    g.x0 = std::floor((box.lo.x - m) / h) * h;
    g.y0 = std::floor((box.lo.y - m) / h) * h;
    g.nx = static_cast<std::size_t>(std::ceil((box.hi.x + m - g.x0) / h));
    g.ny = static_cast<std::size_t>(std::ceil((box.hi.y + m - g.y0) / h));
    return g;
}

struct Interval {
    double lo, hi;
};

/// Inclusive range of cell indices.
struct CellRange {
    long lo, hi;
    long size() const noexcept { return hi >= lo ? hi - lo + 1 : 0; }
};

/// Cells of a row whose centre lies in [lo, hi].
inline CellRange cells_in(const Grid& g, Interval iv) noexcept {
    const long lo = static_cast<long>(std::ceil((iv.lo - g.x0) / g.h - 0.5));
    const long hi = static_cast<long>(std::floor((iv.hi - g.x0) / g.h - 0.5));
    return {std::max(lo, 0L), std::min(hi, static_cast<long>(g.nx) - 1)};
}

/// Sorted disjoint ranges from sorted (possibly overlapping) intervals.
inline std::vector<CellRange> to_cell_ranges(const Grid& g, const std::vector<Interval>& ivs) {
    std::vector<CellRange> out;
    for (const Interval& iv : ivs) {
        const CellRange r = cells_in(g, iv);
        if (r.size() == 0) continue;
        if (!out.empty() && r.lo <= out.back().hi + 1)
            out.back().hi = std::max(out.back().hi, r.hi);
        else
            out.push_back(r);
    }
    return out;
}

inline long total_cells(const std::vector<CellRange>& a) noexcept {
    long n = 0;
    for (const auto& r : a) n += r.size();
    return n;
}

inline std::vector<CellRange> intersect(const std::vector<CellRange>& a, const std::vector<CellRange>& b) {
    std::vector<CellRange> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const long lo = std::max(a[i].lo, b[j].lo), hi = std::min(a[i].hi, b[j].hi);
        if (lo <= hi) out.push_back({lo, hi});
        if (a[i].hi < b[j].hi) ++i;
        else ++j;
    }
    return out;
}

/// Portion of the horizontal line y = yc within distance r of segment [a, b]
/// (a convex slice of the capsule). Returns false if empty.
inline bool capsule_slice(Vec2 a, Vec2 b, double r, double yc, Interval& out) noexcept {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    auto disk = [&](Vec2 c) {
        const double dy = yc - c.y;
        if (std::abs(dy) > r) return;
        const double w = std::sqrt(r * r - dy * dy);
        lo = std::min(lo, c.x - w);
        hi = std::max(hi, c.x + w);
    };
    disk(a);
    disk(b);
    // slab: 0 <= t <= 1 and |perpendicular distance| <= r, both linear in x
    const Vec2 d = b - a;
    const double len2 = dot(d, d), len = std::sqrt(len2);
    double slo = -std::numeric_limits<double>::infinity(), shi = -slo;
    auto clip = [&](double c0, double c1, double vmin, double vmax) {
        // vmin <= c0 + c1 x <= vmax
        if (c1 == 0.0) {
            if (c0 < vmin || c0 > vmax) shi = -std::numeric_limits<double>::infinity();
            return;
        }
        double x1 = (vmin - c0) / c1, x2 = (vmax - c0) / c1;
        if (x1 > x2) std::swap(x1, x2);
        slo = std::max(slo, x1);
        shi = std::min(shi, x2);
    };
    const double ry = yc - a.y;
    // t * len2 = d.x (x - a.x) + d.y ry
    clip(d.y * ry - d.x * a.x, d.x, 0.0, len2);
    // cross(d, p - a) = d.x ry - d.y (x - a.x)
    clip(d.x * ry + d.y * a.x, -d.y, -r * len, r * len);
    if (slo <= shi) {
        lo = std::min(lo, slo);
        hi = std::max(hi, shi);
    }
    if (!(lo <= hi)) return false;
    out = {lo, hi};
    return true;
}

struct RowData {
    std::size_t row = 0;
    double y = 0.0;
    std::vector<double> crossings;  // sorted; even-odd pairs bound the interior
    std::vector<Interval> near;     // merged, sorted slices of the reach-tube
};

/// Horizontal sweep over the rows of a grid. Each row sees the boundary
/// crossings of its centre line and, if reach > 0, the set of x within
/// `reach` of the boundary on that line.
class RowSweep {
public:
    RowSweep(const Polyline& poly, double reach) : poly_(&poly), reach_(reach) {
        const std::size_t k = poly.segment_count();
        order_.resize(k);
        lo_.resize(k);
        hi_.resize(k);
        for (std::size_t s = 0; s < k; ++s) {
            const Vec2 a = poly.seg_a(s), b = poly.seg_b(s);
            lo_[s] = std::min(a.y, b.y) - reach;
            hi_[s] = std::max(a.y, b.y) + reach;
            order_[s] = static_cast<std::uint32_t>(s);
        }
        std::sort(order_.begin(), order_.end(), [&](std::uint32_t p, std::uint32_t q) { return lo_[p] < lo_[q]; });
        sorted_lo_.resize(k);
        for (std::size_t i = 0; i < k; ++i) sorted_lo_[i] = lo_[order_[i]];
    }

    /// Calls f(const RowData&) for rows j0..j1-1 in increasing order.
    template <class F>
    void run(const Grid& g, std::size_t j0, std::size_t j1, F&& f) const {
        if (j0 >= j1) return;
        std::vector<std::uint32_t> active;
        std::size_t next = 0;
        const double ystart = g.cy(j0);
        next = static_cast<std::size_t>(std::upper_bound(sorted_lo_.begin(), sorted_lo_.end(), ystart) - sorted_lo_.begin());
        for (std::size_t i = 0; i < next; ++i)
            if (hi_[order_[i]] >= ystart) active.push_back(order_[i]);
        RowData row;
        for (std::size_t j = j0; j < j1; ++j) {
            const double y = g.cy(j);
            while (next < order_.size() && sorted_lo_[next] <= y) active.push_back(order_[next++]);
            std::erase_if(active, [&](std::uint32_t s) { return hi_[s] < y; });
            row.row = j;
            row.y = y;
            row.crossings.clear();
            row.near.clear();
            for (std::uint32_t s : active) {
                const Vec2 a = poly_->seg_a(s), b = poly_->seg_b(s);
                if ((a.y > y) != (b.y > y)) row.crossings.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                if (reach_ > 0.0) {
                    Interval iv;
                    if (capsule_slice(a, b, reach_, y, iv)) row.near.push_back(iv);
                }
            }
            std::sort(row.crossings.begin(), row.crossings.end());
            if (!row.near.empty()) {
                std::sort(row.near.begin(), row.near.end(), [](Interval p, Interval q) { return p.lo < q.lo; });
                std::size_t w = 0;
                for (std::size_t i = 1; i < row.near.size(); ++i) {
                    if (row.near[i].lo <= row.near[w].hi) row.near[w].hi = std::max(row.near[w].hi, row.near[i].hi);
                    else row.near[++w] = row.near[i];
                }
                row.near.resize(w + 1);
            }
            f(static_cast<const RowData&>(row));
        }
    }

    /// Same as run over all rows, split into chunks processed in parallel.
    /// f must only touch per-row state.
    template <class F>
    void run_parallel(const Grid& g, F&& f) const {
        const std::size_t chunks = std::min<std::size_t>(g.ny, 4 * worker_count());
        if (chunks == 0) return;
        parallel_for(chunks, [&](std::size_t c) {
            run(g, g.ny * c / chunks, g.ny * (c + 1) / chunks, f);
        });
    }

private:
    const Polyline* poly_;
    double reach_;
    std::vector<std::uint32_t> order_;
    std::vector<double> lo_, hi_, sorted_lo_;
};

/// Interior intervals from sorted crossings (even-odd rule).
inline std::vector<Interval> interior_intervals(const std::vector<double>& crossings) {
    std::vector<Interval> out;
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) out.push_back({crossings[i], crossings[i + 1]});
    return out;
}

/// Exact fraction of each grid cell covered by a simple polygon, stored
/// sparsely: per row, the cells an edge passes through with their coverage.
/// Every other cell is fully inside or fully outside, which agrees with the
/// centre test. Signed-area accumulation along rows.
class Coverage {
public:
    Coverage(const Polyline& poly, const Grid& g) : grid_(g), rows_(g.ny) {
        std::vector<std::vector<std::pair<std::uint32_t, double>>> deltas(g.ny);
        const std::size_t k = poly.segment_count();
        for (std::size_t s = 0; s < k; ++s) {
            const Vec2 a = poly.seg_a(s), b = poly.seg_b(s);
            line({(a.x - g.x0) / g.h, (a.y - g.y0) / g.h}, {(b.x - g.x0) / g.h, (b.y - g.y0) / g.h}, deltas);
        }
        parallel_for(g.ny, [&](std::size_t j) {
            auto& d = deltas[j];
            std::sort(d.begin(), d.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
            double acc = 0.0;
            auto& out = rows_[j];
            for (std::size_t i = 0; i < d.size();) {
                const std::uint32_t x = d[i].first;
                while (i < d.size() && d[i].first == x) acc += d[i++].second;
                out.push_back({x, std::clamp(std::abs(acc), 0.0, 1.0)});
            }
            std::vector<std::pair<std::uint32_t, double>>().swap(d);
        });
    }

    const Grid& grid() const noexcept { return grid_; }

    /// Cells of row j touched by the boundary, ascending, with coverage.
    const std::vector<std::pair<std::uint32_t, double>>& row(std::size_t j) const { return rows_[j]; }

    /// Total covered area; equals the polygon area up to rounding.
    double area() const {
        double sum = 0.0;
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                // cells between two touched cells inherit the left one's value
                const std::uint32_t gap = i + 1 < r.size() ? r[i + 1].first - r[i].first - 1 : 0;
                sum += r[i].second * (1.0 + gap);
            }
        }
        return sum * grid_.h * grid_.h;
    }

private:
    using Deltas = std::vector<std::vector<std::pair<std::uint32_t, double>>>;

    void line(Vec2 p0, Vec2 p1, Deltas& acc) const {
        if (p0.y == p1.y) return;
        double dir = 1.0;
        if (p0.y > p1.y) {
            std::swap(p0, p1);
            dir = -1.0;
        }
        const double dxdy = (p1.x - p0.x) / (p1.y - p0.y);
        double x = p0.x;
        const auto ystart = static_cast<long>(std::floor(p0.y));
        const auto yend = static_cast<long>(std::ceil(p1.y));
        auto add = [&](long row, long col, double v) {
            if (v != 0.0) acc[static_cast<std::size_t>(row)].push_back({static_cast<std::uint32_t>(col), v});
        };
        for (long y = ystart; y < yend; ++y) {
            const double dy = std::min(static_cast<double>(y + 1), p1.y) - std::max(static_cast<double>(y), p0.y);
            const double xnext = x + dxdy * dy;
            const double d = dy * dir;
            const double xa = std::min(x, xnext), xb = std::max(x, xnext);
            const double xa_floor = std::floor(xa);
            const long ia = static_cast<long>(xa_floor);
            const double xb_ceil = std::ceil(xb);
            const long ib = static_cast<long>(xb_ceil);
            if (ib <= ia + 1) {
                const double xmf = 0.5 * (x + xnext) - xa_floor;
                add(y, ia, d - d * xmf);
                add(y, ia + 1, d * xmf);
            } else {
                const double inv = 1.0 / (xb - xa);
                const double xaf = xa - xa_floor;
                const double a0 = 0.5 * inv * (1.0 - xaf) * (1.0 - xaf);
                const double xbf = xb - xb_ceil + 1.0;
                const double am = 0.5 * inv * xbf * xbf;
                add(y, ia, d * a0);
                if (ib == ia + 2) {
                    add(y, ia + 1, d * (1.0 - a0 - am));
                } else {
                    const double a1 = inv * (1.5 - xaf);
                    add(y, ia + 1, d * (a1 - a0));
                    for (long xi = ia + 2; xi < ib - 1; ++xi) add(y, xi, d * inv);
                    const double a2 = a1 + static_cast<double>(ib - ia - 3) * inv;
                    add(y, ib - 1, d * (1.0 - a2 - am));
                }
                add(y, ib, d * am);
            }
            x = xnext;
        }
    }

    Grid grid_;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows_;
};

}  // namespace snowheat
