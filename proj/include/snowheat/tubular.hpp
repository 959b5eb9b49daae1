#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "snowheat/error.hpp"
#include "snowheat/generator.hpp"
#include "snowheat/geometry.hpp"
#include "snowheat/raster.hpp"
#include "snowheat/simplicity.hpp"

namespace snowheat {

struct TubeSample {
    double eps = 0.0;
    double mu = 0.0;
    double muErr = 0.0;
    double gridH = 0.0;
    int level = -1;  // construction level, -1 for a fixed polygon
};

/// Sampled inner tube volumes mu(eps), ascending in eps.
struct TubularProfile {
    std::vector<TubeSample> entries;
    std::uint64_t domainId = 0;
    double area = std::numeric_limits<double>::quiet_NaN();  // domain area if known

    void sort() {
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.eps < b.eps; });
    }

    double min_eps() const { return entries.front().eps; }
    double max_eps() const { return entries.back().eps; }

    bool saturated() const {
        return !std::isnan(area) && !entries.empty() && entries.back().mu >= area * (1.0 - 1e-6);
    }

    /// mu at any eps > 0: log-log interpolation inside the sampled range, the
    /// power law through the two smallest samples below it, and the
    /// saturation value (domain area if known) above it.
    double mu_at(double eps) const {
        if (entries.size() < 2) throw InvalidParameter("tube profile needs at least two samples");
        if (!(eps > 0.0)) return 0.0;
        const auto& e = entries;
        if (eps >= e.back().eps) return std::isnan(area) ? e.back().mu : area;
        if (eps <= e.front().eps) {
            const double p = std::log(e[1].mu / e[0].mu) / std::log(e[1].eps / e[0].eps);
            return e[0].mu * std::pow(eps / e[0].eps, p);
        }
        const auto it = std::upper_bound(e.begin(), e.end(), eps, [](double v, const TubeSample& s) { return v < s.eps; });
        const TubeSample& hi = *it;
        const TubeSample& lo = *std::prev(it);
        if (lo.mu <= 0.0 || hi.mu <= 0.0) return lo.mu + (hi.mu - lo.mu) * (eps - lo.eps) / (hi.eps - lo.eps);
        const double w = std::log(eps / lo.eps) / std::log(hi.eps / lo.eps);
        return std::exp(std::log(lo.mu) + w * std::log(hi.mu / lo.mu));
    }
};

struct TubeVolume {
    double mu = 0.0;
    double muErr = 0.0;
};

struct TubeOptions {
    bool check_simple = true;
};

/// Area of the inner eps-tube: cells of pitch gridH whose centre is inside
/// (even-odd) and within eps of the boundary (exact segment distance). The
/// error is gridH^2 times the number of cell faces on the boundary of the
/// counted set.
inline TubeVolume tube_volume(const Polyline& poly, double eps, double gridH, TubeOptions opt = {}) {
    if (!poly.closed) throw InvalidDomain("tube_volume: polygon must be closed");
    if (!(eps > 0.0) || !(gridH > 0.0)) throw InvalidParameter("tube_volume: eps and gridH must be positive");
    if (gridH > eps / 4.0 * (1.0 + 1e-12)) throw InvalidParameter("tube_volume: gridH must be <= eps/4");
    if (opt.check_simple && !simplicity_check(poly)) throw InvalidDomain("tube_volume: polygon is not simple");

    const Grid g = grid_covering(bounding_box(poly), gridH);
    const std::size_t cells = g.cells();
    if (g.ny > (std::size_t{1} << 31) || cells / std::max<std::size_t>(g.ny, 1) > (std::size_t{1} << 31))
        throw ResourceCap("tube_volume: grid too large");
    std::vector<std::vector<CellRange>> set(g.ny);
    RowSweep sweep(poly, eps);
    sweep.run_parallel(g, [&](const RowData& row) {
        set[row.row] = intersect(to_cell_ranges(g, interior_intervals(row.crossings)), to_cell_ranges(g, row.near));
    });

    long count = 0, faces = 0;
    static const std::vector<CellRange> none;
    for (std::size_t j = 0; j < g.ny; ++j) {
        const long n = total_cells(set[j]);
        count += n;
        faces += 2 * static_cast<long>(set[j].size());
        const auto& next = j + 1 < g.ny ? set[j + 1] : none;
        const long both = total_cells(intersect(set[j], next));
        faces += n + total_cells(next) - 2 * both;
        if (j == 0) faces += n;
    }
    const double h2 = gridH * gridH;
    return {static_cast<double>(count) * h2, static_cast<double>(faces) * h2};
}

/// Profile of a fixed polygon with gridH = eps / cellsPerEps.
inline TubularProfile tube_profile(const Polyline& poly, const std::vector<double>& epsList, double cellsPerEps = 8.0) {
    if (!simplicity_check(poly)) throw InvalidDomain("tube_profile: polygon is not simple");
    TubularProfile prof;
    prof.domainId = content_hash(poly);
    prof.area = area(poly);
    for (double eps : epsList) {
        const TubeVolume tv = tube_volume(poly, eps, eps / cellsPerEps, {false});
        prof.entries.push_back({eps, tv.mu, tv.muErr, eps / cellsPerEps, -1});
    }
    prof.sort();
    return prof;
}

/// Smallest n with eps_n <= target.
inline std::size_t level_for(const ScaleSequence& seq, double target, std::size_t maxLevel = 64) {
    double e = 1.0;
    for (std::size_t n = 0; n <= maxLevel; ++n) {
        if (e <= target) return n;
        e /= BlockParam::of(seq[n + 1]).ell;
    }
    throw ResourceCap("no construction level reaches eps <= " + std::to_string(target));
}

/// Snowflake profile: each eps uses the level with eps_n <= eps/4 and
/// gridH = eps/8.
inline TubularProfile tube_profile(const ScaleSequence& seq, const std::vector<double>& epsList,
                                   std::size_t cap = kDefaultSegmentCap) {
    TubularProfile prof;
    std::map<std::size_t, Polyline> polys;
    for (double eps : epsList) {
        if (!(eps > 0.0)) throw InvalidParameter("tube_profile: eps must be positive");
        const std::size_t n = level_for(seq, eps / 4.0);
        auto it = polys.find(n);
        if (it == polys.end()) {
            Polyline p = snowflake(seq, n, cap);
            if (!simplicity_check(p)) throw InvalidDomain("snowflake level " + std::to_string(n) + " is not simple");
            it = polys.emplace(n, std::move(p)).first;
        }
        const TubeVolume tv = tube_volume(it->second, eps, eps / 8.0, {false});
        prof.entries.push_back({eps, tv.mu, tv.muErr, eps / 8.0, static_cast<int>(n)});
    }
    if (!polys.empty()) {
        const Polyline& finest = polys.rbegin()->second;
        prof.domainId = content_hash(finest);
        prof.area = area(finest);
    }
    prof.sort();
    return prof;
}

struct SpikeBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Whole-snowflake sandwich for mu(eps_n): three thirds, each holding
/// M_{n-1} xi_n spikes of area (sqrt3/4) eps_n^2 and at most 4 M_n eps_n^2.
inline SpikeBounds spike_bounds(const ScaleSequence& seq, std::size_t n) {
    if (n < 1) throw InvalidParameter("spike_bounds: n must be >= 1");
    const Counts prev = counts(seq, n - 1);
    const Counts cur = counts(seq, n);
    auto logd = [](const BigInt& v) {
        // log of a big integer without overflow
        const std::size_t bits = boost::multiprecision::msb(v) + 1;
        if (bits <= 1000) return std::log(v.convert_to<double>());
        const BigInt top = v >> (bits - 64);
        return std::log(top.convert_to<double>()) + static_cast<double>(bits - 64) * std::numbers::ln2;
    };
    const double log_eps2 = -2.0 * logd(cur.L);
    SpikeBounds b;
    b.lower = 3.0 * (std::numbers::sqrt3 / 4.0) * seq[n] * std::exp(logd(prev.M) + log_eps2);
    b.upper = 12.0 * std::exp(logd(cur.M) + log_eps2);
    return b;
}

}  // namespace snowheat
