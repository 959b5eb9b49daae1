#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "snowheat/error.hpp"

namespace snowheat {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double k) const noexcept { return {x * k, y * k}; }
    constexpr bool operator==(const Vec2&) const noexcept = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }

struct Box {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

    void extend(Vec2 p) noexcept {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    double width() const noexcept { return hi.x - lo.x; }
    double height() const noexcept { return hi.y - lo.y; }
};

/// Ordered planar vertex chain. A closed polyline stores each vertex once;
/// the edge from the last vertex back to the first is implicit.
struct Polyline {
    std::vector<Vec2> vertices;
    bool closed = false;

    std::size_t segment_count() const noexcept {
        const std::size_t n = vertices.size();
        if (n < 2) return 0;
        return closed ? n : n - 1;
    }
    Vec2 seg_a(std::size_t i) const noexcept { return vertices[i]; }
    Vec2 seg_b(std::size_t i) const noexcept {
        return vertices[i + 1 == vertices.size() ? 0 : i + 1];
    }
};

inline Box bounding_box(const Polyline& p) noexcept {
    Box b;
    for (Vec2 v : p.vertices) b.extend(v);
    return b;
}

/// Shoelace area; positive for counter-clockwise closed polylines.
inline double signed_area(const Polyline& p) noexcept {
    const std::size_t n = p.vertices.size();
    if (n < 3) return 0.0;
    // Kahan-compensated: snowflakes reach 10^6 vertices.
    double sum = 0.0, comp = 0.0;
    const Vec2 o = p.vertices[0];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double term = cross(p.vertices[i] - o, p.vertices[i + 1] - o);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return 0.5 * sum;
}

inline double area(const Polyline& p) noexcept { return std::abs(signed_area(p)); }

inline double perimeter(const Polyline& p) noexcept {
    double len = 0.0;
    for (std::size_t i = 0; i < p.segment_count(); ++i) len += norm(p.seg_b(i) - p.seg_a(i));
    return len;
}

/// Consecutive vertices distinct (including the closing edge).
inline bool has_distinct_consecutive(const Polyline& p) noexcept {
    for (std::size_t i = 0; i < p.segment_count(); ++i)
        if (p.seg_a(i) == p.seg_b(i)) return false;
    return true;
}

inline Polyline transformed(const Polyline& p, double scale, Vec2 shift) {
    Polyline out{{}, p.closed};
    out.vertices.reserve(p.vertices.size());
    for (Vec2 v : p.vertices) out.vertices.push_back(v * scale + shift);
    return out;
}

inline Polyline reversed(const Polyline& p) {
    Polyline out = p;
    std::reverse(out.vertices.begin(), out.vertices.end());
    return out;
}

struct SegmentProjection {
    double dist2;
    double t;  // parameter of the closest point along a->b, in [0, 1]
};

inline SegmentProjection project_to_segment(Vec2 p, Vec2 a, Vec2 b) noexcept {
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 c = a + d * t;
    const Vec2 e = p - c;
    return {dot(e, e), t};
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) noexcept {
    return std::sqrt(project_to_segment(p, a, b).dist2);
}

/// Even-odd point-in-polygon, O(k). Use PolygonIndex for repeated queries.
inline bool point_in_polygon(const Polyline& poly, Vec2 p) noexcept {
    bool inside = false;
    for (std::size_t i = 0; i < poly.segment_count(); ++i) {
        const Vec2 a = poly.seg_a(i), b = poly.seg_b(i);
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (xc > p.x) inside = !inside;
        }
    }
    return inside;
}

/// Uniform bin index over the segments of a closed polygon, for nearest
/// boundary queries. Inside/outside is decided from the nearest feature
/// (segment interior or vertex), which is exact for simple polygons.
class PolygonIndex {
public:
    explicit PolygonIndex(const Polyline& poly, std::size_t target_per_bin = 4) : poly_(&poly) {
        if (!poly.closed || poly.vertices.size() < 3)
            throw InvalidDomain("PolygonIndex: polygon must be closed with >= 3 vertices");
        box_ = bounding_box(poly);
        const std::size_t k = poly.segment_count();
        const double w = std::max(box_.width(), 1e-300), h = std::max(box_.height(), 1e-300);
        const double cells = std::max(1.0, static_cast<double>(k) / static_cast<double>(target_per_bin));
        cell_ = std::sqrt(w * h / cells);
        // keep cells no smaller than the typical segment so each segment hits few bins
        cell_ = std::max(cell_, perimeter(poly) / static_cast<double>(k));
        nx_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(w / cell_)));
        ny_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(h / cell_)));
        ccw_ = signed_area(poly) > 0.0;

        std::vector<std::uint32_t> counts(nx_ * ny_ + 1, 0);
        auto for_bins = [&](std::size_t s, auto&& f) {
            const Vec2 a = poly.seg_a(s), b = poly.seg_b(s);
            const auto [ix0, iy0] = bin_of({std::min(a.x, b.x), std::min(a.y, b.y)});
            const auto [ix1, iy1] = bin_of({std::max(a.x, b.x), std::max(a.y, b.y)});
            for (std::size_t iy = iy0; iy <= iy1; ++iy)
                for (std::size_t ix = ix0; ix <= ix1; ++ix) f(iy * nx_ + ix);
        };
        for (std::size_t s = 0; s < k; ++s) for_bins(s, [&](std::size_t c) { ++counts[c + 1]; });
        for (std::size_t c = 0; c < nx_ * ny_; ++c) counts[c + 1] += counts[c];
        start_ = counts;
        items_.assign(counts.back(), 0);
        for (std::size_t s = 0; s < k; ++s)
            for_bins(s, [&](std::size_t c) { items_[counts[c]++] = static_cast<std::uint32_t>(s); });
    }

    struct Nearest {
        double distance;
        std::size_t segment;
        double t;
    };

    /// Nearest boundary point; rings of bins are searched outward until the
    /// ring distance exceeds the best candidate.
    Nearest nearest(Vec2 p) const noexcept {
        const auto [cx, cy] = bin_of(p);
        // distance from p to the box, so far-away queries start at the right ring
        const double outside = std::hypot(std::max({box_.lo.x - p.x, 0.0, p.x - box_.hi.x}),
                                          std::max({box_.lo.y - p.y, 0.0, p.y - box_.hi.y}));
        double best2 = std::numeric_limits<double>::infinity();
        Nearest best{best2, 0, 0.0};
        const long ncx = static_cast<long>(cx), ncy = static_cast<long>(cy);
        const long max_ring = static_cast<long>(std::max(nx_, ny_));
        auto scan_bin = [&](long ix, long iy) {
            if (ix < 0 || iy < 0 || ix >= static_cast<long>(nx_) || iy >= static_cast<long>(ny_)) return;
            const std::size_t c = static_cast<std::size_t>(iy) * nx_ + static_cast<std::size_t>(ix);
            for (std::uint32_t q = start_[c]; q < start_[c + 1]; ++q) {
                const std::uint32_t s = items_[q];
                const auto pr = project_to_segment(p, poly_->seg_a(s), poly_->seg_b(s));
                if (pr.dist2 < best2) {
                    best2 = pr.dist2;
                    best = {0.0, s, pr.t};
                }
            }
        };
        for (long r = 0; r <= max_ring; ++r) {
            if (r > 0) {
                const double ring_dist = std::max(outside, static_cast<double>(r - 1) * cell_);
                if (ring_dist * ring_dist > best2) break;
            }
            if (r == 0) {
                scan_bin(ncx, ncy);
                continue;
            }
            for (long ix = ncx - r; ix <= ncx + r; ++ix) {
                scan_bin(ix, ncy - r);
                scan_bin(ix, ncy + r);
            }
            for (long iy = ncy - r + 1; iy <= ncy + r - 1; ++iy) {
                scan_bin(ncx - r, iy);
                scan_bin(ncx + r, iy);
            }
        }
        best.distance = std::sqrt(best2);
        return best;
    }

    double distance(Vec2 p) const noexcept { return nearest(p).distance; }

    /// Inside test from the nearest boundary feature.
    bool inside(Vec2 p) const noexcept { return inside_from(p, nearest(p)); }

    /// Positive inside, negative outside.
    double signed_distance(Vec2 p) const noexcept {
        const Nearest n = nearest(p);
        return inside_from(p, n) ? n.distance : -n.distance;
    }

    bool inside_from(Vec2 p, const Nearest& n) const noexcept {
        const std::size_t k = poly_->segment_count();
        const std::size_t s = n.segment;
        auto interior_side = [&](std::size_t seg) {
            const Vec2 a = poly_->seg_a(seg), b = poly_->seg_b(seg);
            const double c = cross(b - a, p - a);
            return ccw_ ? c > 0.0 : c < 0.0;
        };
        if (n.t > 0.0 && n.t < 1.0) return interior_side(s);
        // nearest feature is a vertex shared by two edges
        const std::size_t e1 = n.t <= 0.0 ? (s + k - 1) % k : s;
        const std::size_t e2 = (e1 + 1) % k;
        const Vec2 a = poly_->seg_a(e1), v = poly_->seg_b(e1), b = poly_->seg_b(e2);
        const double turn = cross(v - a, b - v);
        const bool convex = ccw_ ? turn > 0.0 : turn < 0.0;
        return convex ? (interior_side(e1) && interior_side(e2))
                      : (interior_side(e1) || interior_side(e2));
    }

    const Polyline& polygon() const noexcept { return *poly_; }
    const Box& box() const noexcept { return box_; }

private:
    std::pair<std::size_t, std::size_t> bin_of(Vec2 p) const noexcept {
        auto clampi = [](double v, std::size_t n) {
            if (!(v > 0.0)) return std::size_t{0};
            const auto i = static_cast<std::size_t>(v);
            return std::min(i, n - 1);
        };
        return {clampi((p.x - box_.lo.x) / cell_, nx_), clampi((p.y - box_.lo.y) / cell_, ny_)};
    }

    const Polyline* poly_;
    Box box_;
    double cell_ = 1.0;
    std::size_t nx_ = 1, ny_ = 1;
    bool ccw_ = true;
    std::vector<std::uint32_t> start_;
    std::vector<std::uint32_t> items_;
};

/// Fixed-size canonical content hash of a polygon (FNV-1a over the raw
/// coordinate bits), used as a domain id and cache key.
inline std::uint64_t content_hash(const Polyline& p) noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    auto eat = [&](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    const unsigned char closed = p.closed ? 1 : 0;
    eat(&closed, 1);
    for (Vec2 v : p.vertices) {
        eat(&v.x, sizeof v.x);
        eat(&v.y, sizeof v.y);
    }
    return h;
}

}  // namespace snowheat
