#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <set>
#include <vector>

#include "snowheat/geometry.hpp"

namespace snowheat {

namespace detail {

inline int orientation(Vec2 a, Vec2 b, Vec2 c) noexcept {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) noexcept {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace detail

/// Closed-segment intersection test (touching counts).
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) noexcept {
    using detail::on_segment;
    using detail::orientation;
    const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

namespace detail {

// Polygon edges i and j share a vertex.
inline bool edges_adjacent(const Polyline& p, std::size_t i, std::size_t j) noexcept {
    const std::size_t k = p.segment_count();
    if (i > j) std::swap(i, j);
    if (j == i + 1) return true;
    return p.closed && i == 0 && j + 1 == k;
}

// Two adjacent edges are fine unless they fold back over each other.
inline bool adjacent_edges_ok(const Polyline& p, std::size_t i, std::size_t j) noexcept {
    const std::size_t k = p.segment_count();
    if (i > j) std::swap(i, j);
    std::size_t first = i, second = j;  // second follows first
    if (p.closed && i == 0 && j + 1 == k) {
        first = j;
        second = i;
    }
    const Vec2 v = p.seg_b(first);
    const Vec2 d1 = p.seg_a(first) - v, d2 = p.seg_b(second) - v;
    if (cross(d1, d2) != 0.0) return true;
    return dot(d1, d2) < 0.0;
}

}  // namespace detail

/// True iff no two non-adjacent segments intersect (and adjacent ones only
/// share their common vertex). Shamos-Hoey sweep, O(k log k). Degenerate
/// input (fewer than 3 vertices for a closed chain, repeated consecutive
/// vertices) yields false.
inline bool simplicity_check(const Polyline& poly) {
    const std::size_t k = poly.segment_count();
    if (poly.closed ? poly.vertices.size() < 3 : poly.vertices.size() < 2) return false;
    if (!has_distinct_consecutive(poly)) return false;
    for (Vec2 v : poly.vertices)
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) return false;
    if (poly.closed && k == 3)
        return detail::orientation(poly.vertices[0], poly.vertices[1], poly.vertices[2]) != 0;

    auto less_pt = [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); };
    std::vector<Vec2> left(k), right(k);
    for (std::size_t s = 0; s < k; ++s) {
        Vec2 a = poly.seg_a(s), b = poly.seg_b(s);
        if (less_pt(b, a)) std::swap(a, b);
        left[s] = a;
        right[s] = b;
    }

    struct Event {
        Vec2 p;
        bool is_left;
        std::uint32_t seg;
    };
    std::vector<Event> events;
    events.reserve(2 * k);
    for (std::size_t s = 0; s < k; ++s) {
        events.push_back({left[s], true, static_cast<std::uint32_t>(s)});
        events.push_back({right[s], false, static_cast<std::uint32_t>(s)});
    }
    std::sort(events.begin(), events.end(), [&](const Event& a, const Event& b) {
        if (a.p.x != b.p.x) return a.p.x < b.p.x;
        if (a.p.y != b.p.y) return a.p.y < b.p.y;
        return a.is_left && !b.is_left;  // insert before removing at a shared point
    });

    double sweep_x = 0.0;
    auto y_at = [&](std::uint32_t s) {
        const Vec2 a = left[s], b = right[s];
        if (a.x == b.x || sweep_x <= a.x) return a.y;
        if (sweep_x >= b.x) return b.y;
        return a.y + (sweep_x - a.x) * (b.y - a.y) / (b.x - a.x);
    };
    auto slope = [&](std::uint32_t s) {
        const Vec2 a = left[s], b = right[s];
        if (a.x == b.x) return std::numeric_limits<double>::infinity();
        return (b.y - a.y) / (b.x - a.x);
    };
    auto cmp = [&](std::uint32_t a, std::uint32_t b) {
        if (a == b) return false;
        const double ya = y_at(a), yb = y_at(b);
        if (ya != yb) return ya < yb;
        const double sa = slope(a), sb = slope(b);
        if (sa != sb) return sa < sb;
        return a < b;
    };
    using Status = std::set<std::uint32_t, decltype(cmp)>;
    Status status(cmp);
    std::vector<typename Status::iterator> where(k, status.end());

    auto conflict = [&](std::uint32_t a, std::uint32_t b) {
        if (detail::edges_adjacent(poly, a, b)) return !detail::adjacent_edges_ok(poly, a, b);
        return segments_intersect(left[a], right[a], left[b], right[b]);
    };

    for (const Event& e : events) {
        sweep_x = e.p.x;
        if (e.is_left) {
            auto [it, ok] = status.insert(e.seg);
            if (!ok) return false;
            where[e.seg] = it;
            if (it != status.begin() && conflict(*std::prev(it), e.seg)) return false;
            if (auto nx = std::next(it); nx != status.end() && conflict(*nx, e.seg)) return false;
        } else {
            auto it = where[e.seg];
            if (it != status.begin()) {
                auto nx = std::next(it);
                if (nx != status.end() && conflict(*std::prev(it), *nx)) return false;
            }
            status.erase(it);
        }
    }
    return true;
}

}  // namespace snowheat
