#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "snowheat/geometry.hpp"

namespace oracle {

// Heat content of the unit square for u_t = (1/2) Lap u by separation of variables.
inline double square_survival_1d(double t) {
    double p = 0.0;
    for (int k = 1; k < 4001; k += 2) {
        const double kp = k * std::numbers::pi;
        p += 8.0 / (kp * kp) * std::exp(-kp * kp * t / 2.0);
    }
    return p;
}

inline double square_heat(double s) {
    const double p = square_survival_1d(s);
    return 1.0 - p * p;
}

inline double seg_dist(snowheat::Vec2 p, snowheat::Vec2 a, snowheat::Vec2 b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy);
    t = std::fmin(1.0, std::fmax(0.0, t));
    return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
}

inline double brute_distance(const snowheat::Polyline& poly, snowheat::Vec2 p) {
    double d = HUGE_VAL;
    for (std::size_t i = 0; i < poly.segment_count(); ++i) d = std::fmin(d, seg_dist(p, poly.seg_a(i), poly.seg_b(i)));
    return d;
}

inline double cross(snowheat::Vec2 o, snowheat::Vec2 a, snowheat::Vec2 b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Proper or touching intersection of two closed segments.
inline bool seg_meet(snowheat::Vec2 p1, snowheat::Vec2 p2, snowheat::Vec2 q1, snowheat::Vec2 q2) {
    const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2), d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    auto on = [](snowheat::Vec2 a, snowheat::Vec2 b, snowheat::Vec2 c) {
        return std::fmin(a.x, b.x) <= c.x && c.x <= std::fmax(a.x, b.x) && std::fmin(a.y, b.y) <= c.y && c.y <= std::fmax(a.y, b.y);
    };
    return (d1 == 0 && on(q1, q2, p1)) || (d2 == 0 && on(q1, q2, p2)) || (d3 == 0 && on(p1, p2, q1)) || (d4 == 0 && on(p1, p2, q2));
}

// O(n^2) simplicity of a closed polygon: non-adjacent edges never meet,
// adjacent edges share only their common vertex.
inline bool brute_simple(const snowheat::Polyline& p) {
    const std::size_t n = p.segment_count();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adj = j == i + 1 || (i == 0 && j == n - 1);
            if (!adj) {
                if (seg_meet(p.seg_a(i), p.seg_b(i), p.seg_a(j), p.seg_b(j))) return false;
            } else {
                // collinear overlap of neighbours
                const auto a = p.seg_a(i), b = p.seg_b(i), c = p.seg_a(j), d = p.seg_b(j);
                if (cross(a, b, c) == 0 && cross(a, b, d) == 0) {
                    const double dot = (b.x - a.x) * (d.x - c.x) + (b.y - a.y) * (d.y - c.y);
                    if (dot < 0) return false;
                }
            }
        }
    return true;
}

// Renewal equation u(t) = e^{-g t} 1[t<1] + sum_a w_a u(t - log l_a) for the
// discounted mean characteristic count of a variant law, on a grid of step dt.
inline double renewal(const std::vector<std::pair<double, double>>& weightAndOffset, double g, double t, double dt = 1e-3) {
    const auto n = static_cast<std::size_t>(t / dt) + 1;
    std::vector<double> u(n);
    std::vector<std::pair<double, std::size_t>> sh;
    for (auto [w, off] : weightAndOffset) sh.push_back({w, static_cast<std::size_t>(std::lround(off / dt))});
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = static_cast<double>(i) * dt;
        double v = ti < 1.0 ? std::exp(-g * ti) : 0.0;
        for (auto [w, s] : sh)
            if (i >= s) v += w * u[i - s];
        u[i] = v;
    }
    return u.back();
}

}  // namespace oracle
