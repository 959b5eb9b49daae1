#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "snowheat/error.hpp"
#include "snowheat/gbp.hpp"
#include "snowheat/generator.hpp"
#include "snowheat/geometry.hpp"
#include "snowheat/heat.hpp"
#include "snowheat/parallel.hpp"
#include "snowheat/rng.hpp"
#include "snowheat/tubular.hpp"

namespace snowheat {

struct SelfSimSide {
    std::uint64_t rootKey = 0;
    std::size_t leaves = 0;
    std::size_t cells = 0;      // all cells visited, leaves included
    double mAtT = 0.0;          // M_T
    double mAtHalfT = 0.0;      // M_{T/2}
    double mAtCut = 0.0;        // M at the cut horizon (sum over leaves)
};

struct SelfSimilarRealization {
    Polyline polygon;
    std::vector<SelfSimSide> sides;
    OffspringLaw law;
    double gamma = 0.0;
    double epsMin = 0.0;
    double T = 0.0;     // log(1/(8 epsMin))
    double cut = 0.0;   // log(1/epsMin)
    std::uint64_t seed = 0;
    bool nonLattice = true;

    /// N_inf proxy: mean of the three sides' M_T.
    double n_inf() const {
        double s = 0.0;
        for (const auto& sd : sides) s += sd.mAtT;
        return s / static_cast<double>(sides.size());
    }
    double n_inf_half() const {
        double s = 0.0;
        for (const auto& sd : sides) s += sd.mAtHalfT;
        return s / static_cast<double>(sides.size());
    }
};

/// Root key of side k of the snowflake grown from `seed`.
inline std::uint64_t side_key(std::uint64_t seed, int side) noexcept {
    return derive_key(root_key(seed), static_cast<std::uint64_t>(side));
}

/// Statistically self-similar snowflake: every cell draws its own block type
/// from its key and is refined until its scale is <= epsMin. Side k is the
/// tree grown from side_key(seed, k), so each side couples to a GBP
/// realization of the snowflake law.
inline SelfSimilarRealization sample_snowflake(const std::vector<int>& alphabet, const std::vector<double>& probs, double epsMin,
                                               std::uint64_t seed, std::size_t cap = kDefaultPopulationCap) {
    if (!(epsMin > 0.0 && epsMin < 1.0)) throw InvalidParameter("sample_snowflake: epsMin must be in (0, 1)");
    SelfSimilarRealization r;
    r.law = OffspringLaw::snowflake(alphabet, probs);
    r.gamma = malthusian(r.law);
    r.nonLattice = lattice_check(r.law);
    r.epsMin = epsMin;
    r.seed = seed;
    r.cut = std::log(1.0 / epsMin);
    r.T = std::log(1.0 / (8.0 * epsMin));
    // refine while the integer inverse scale is below 1/epsMin (relative slack for rounding)
    const double limit = (1.0 / epsMin) * (1.0 - 1e-12);
    std::vector<Polyline> blocks;
    for (int a : alphabet) {
        if (static_cast<std::size_t>(a) >= blocks.size()) blocks.resize(static_cast<std::size_t>(a) + 1);
        blocks[static_cast<std::size_t>(a)] = block_generator(a);
    }
    const auto base = snowflake_base();
    r.polygon.closed = true;
    std::size_t total = 0;
    for (int side = 0; side < 3; ++side) {
        SelfSimSide sd;
        sd.rootKey = side_key(seed, side);
        struct Node {
            Vec2 p, q;
            std::uint64_t key;
            double inv;  // product of ell along the ancestry
            double sigma, parentSigma;
        };
        std::vector<Node> stack{{base[side], base[(side + 1) % 3], sd.rootKey, 1.0, 0.0, -HUGE_VAL}};
        const double halfT = 0.5 * r.T;
        while (!stack.empty()) {
            const Node x = stack.back();
            stack.pop_back();
            ++sd.cells;
            if (++total > cap) throw ResourceCap("sample_snowflake: population cap exceeded");
            const double w = std::exp(-r.gamma * x.sigma);
            if (x.parentSigma <= r.T && r.T < x.sigma) sd.mAtT += w;
            if (x.parentSigma <= halfT && halfT < x.sigma) sd.mAtHalfT += w;
            if (!(x.inv < limit)) {
                ++sd.leaves;
                sd.mAtCut += w;
                r.polygon.vertices.push_back(x.p);
                continue;
            }
            const OffspringVariant& v = r.law.variants[r.law.draw(x.key)];
            const Polyline& blk = blocks[static_cast<std::size_t>(v.type)];
            const std::size_t m = blk.vertices.size() - 1;
            // push in reverse so the leftmost child is expanded first
            for (std::size_t i = m; i-- > 0;) {
                const Vec2 a = i == 0 ? x.p : detail::place(blk.vertices[i], x.p, x.q);
                const Vec2 b = i + 1 == m ? x.q : detail::place(blk.vertices[i + 1], x.p, x.q);
                stack.push_back({a, b, derive_key(x.key, i), x.inv * static_cast<double>(v.ell), x.sigma + v.offset, x.sigma});
            }
        }
        r.sides.push_back(sd);
    }
    return r;
}

struct SeedRow {
    std::uint64_t seed = 0;
    double nInf = 0.0;          // M_T proxy
    double nInfHalf = 0.0;      // M_{T/2}
    std::vector<double> grid;   // eps or s
    std::vector<double> values; // y(eps) or z(s)
    double stabilization = 0.0; // max/min over the last decade
    double limitProxy = 0.0;    // geometric mean over the last decade
};

struct LimitReport {
    double gamma = 0.0;
    std::vector<SeedRow> rows;
    double correlation = 0.0;    // between limitProxy and nInf
    double slopeThroughOrigin = 0.0;
    double constant = 0.0;       // mean of limitProxy / nInf
    double constantStderr = 0.0;
    double meanN = 0.0;
    double meanNStderr = 0.0;
    double maxStabilization = 0.0;
};

namespace detail {

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

inline std::pair<double, double> mean_stderr(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0};
}

// grid ascending; the last decade is the one at the small end
inline void summarize_row(SeedRow& row) {
    const double lo = row.grid.front();
    double mx = -HUGE_VAL, mn = HUGE_VAL, lsum = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < row.grid.size(); ++i)
        if (row.grid[i] <= 10.0 * lo * (1 + 1e-12)) {
            mx = std::max(mx, row.values[i]);
            mn = std::min(mn, row.values[i]);
            lsum += std::log(row.values[i]);
            ++k;
        }
    row.stabilization = mx / mn;
    row.limitProxy = std::exp(lsum / static_cast<double>(k));
}

inline void summarize(LimitReport& rep) {
    std::vector<double> y, n, ratio;
    double sxy = 0, sxx = 0;
    for (const auto& r : rep.rows) {
        y.push_back(r.limitProxy);
        n.push_back(r.nInf);
        ratio.push_back(r.limitProxy / r.nInf);
        sxy += r.limitProxy * r.nInf;
        sxx += r.nInf * r.nInf;
        rep.maxStabilization = std::max(rep.maxStabilization, r.stabilization);
    }
    rep.correlation = pearson(y, n);
    rep.slopeThroughOrigin = sxy / sxx;
    std::tie(rep.constant, rep.constantStderr) = mean_stderr(ratio);
    std::tie(rep.meanN, rep.meanNStderr) = mean_stderr(n);
}

}  // namespace detail

/// y(eps) = eps^{gamma-2} mu(eps) per realization, against M_T.
inline LimitReport minkowski_limit_experiment(const std::vector<SelfSimilarRealization>& reals, std::vector<double> epsGrid,
                                              double cellsPerEps = 8.0) {
    if (reals.empty()) throw InvalidParameter("minkowski_limit_experiment: no realizations");
    std::sort(epsGrid.begin(), epsGrid.end());
    if (epsGrid.size() < 2) throw InvalidParameter("minkowski_limit_experiment: need at least two eps values");
    LimitReport rep;
    rep.gamma = reals.front().gamma;
    rep.rows.resize(reals.size());
    for (std::size_t k = 0; k < reals.size(); ++k) {
        const auto& r = reals[k];
        if (epsGrid.front() <= 8.0 * r.epsMin || epsGrid.back() >= 0.1)
            throw InvalidParameter("minkowski_limit_experiment: eps grid must lie in (8 epsMin, 0.1)");
        SeedRow& row = rep.rows[k];
        row.seed = r.seed;
        row.nInf = r.n_inf();
        row.nInfHalf = r.n_inf_half();
        row.grid = epsGrid;
        const TubularProfile prof = tube_profile(r.polygon, epsGrid, cellsPerEps);
        for (const auto& e : prof.entries) row.values.push_back(std::pow(e.eps, r.gamma - 2.0) * e.mu);
        detail::summarize_row(row);
    }
    detail::summarize(rep);
    return rep;
}

/// z(s) = s^{gamma/2-1} E(s) per realization by heat_fd, against M_T.
inline LimitReport heat_limit_experiment(const std::vector<SelfSimilarRealization>& reals, std::vector<double> sGrid,
                                         double cellsPerLength = 8.0) {
    if (reals.empty()) throw InvalidParameter("heat_limit_experiment: no realizations");
    std::sort(sGrid.begin(), sGrid.end());
    if (sGrid.size() < 2) throw InvalidParameter("heat_limit_experiment: need at least two times");
    LimitReport rep;
    rep.gamma = reals.front().gamma;
    rep.rows.resize(reals.size());
    for (std::size_t k = 0; k < reals.size(); ++k) {
        const auto& r = reals[k];
        if (std::sqrt(sGrid.front()) <= 8.0 * r.epsMin || std::sqrt(sGrid.back()) >= 0.05)
            throw InvalidParameter("heat_limit_experiment: sqrt(s) must lie in (8 epsMin, 0.05)");
        SeedRow& row = rep.rows[k];
        row.seed = r.seed;
        row.nInf = r.n_inf();
        row.nInfHalf = r.n_inf_half();
        row.grid = sGrid;
        const HeatProfile prof = heat_fd(r.polygon, sGrid, std::sqrt(sGrid.front()) / cellsPerLength);
        for (const auto& e : prof.entries) row.values.push_back(std::pow(e.s, r.gamma / 2.0 - 1.0) * e.E);
        detail::summarize_row(row);
    }
    detail::summarize(rep);
    return rep;
}

struct CrossRatio {
    std::vector<double> ratios;  // limitProxy(mink) / limitProxy(heat), per common seed
    double mean = 0.0;
    double maxDeviation = 0.0;   // max |r / mean - 1|
};

inline CrossRatio cross_ratio(const LimitReport& mink, const LimitReport& heat) {
    CrossRatio c;
    for (const auto& h : heat.rows)
        for (const auto& m : mink.rows)
            if (m.seed == h.seed) c.ratios.push_back(m.limitProxy / h.limitProxy);
    if (c.ratios.empty()) throw InvalidParameter("cross_ratio: no common seeds");
    c.mean = std::accumulate(c.ratios.begin(), c.ratios.end(), 0.0) / static_cast<double>(c.ratios.size());
    for (double r : c.ratios) c.maxDeviation = std::max(c.maxDeviation, std::abs(r / c.mean - 1.0));
    return c;
}

}  // namespace snowheat
