#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "snowheat/dimension.hpp"
#include "snowheat/error.hpp"
#include "snowheat/generator.hpp"
#include "snowheat/geometry.hpp"
#include "snowheat/parallel.hpp"
#include "snowheat/raster.hpp"
#include "snowheat/rng.hpp"
#include "snowheat/simplicity.hpp"
#include "snowheat/tubular.hpp"

namespace snowheat {

enum class HeatMethod { fd, mc, bound_upper_vdb, bound_upper_thm22, bound_lower_proxy };

inline const char* to_string(HeatMethod m) {
    switch (m) {
        case HeatMethod::fd: return "fd";
        case HeatMethod::mc: return "mc";
        case HeatMethod::bound_upper_vdb: return "bound-upper-vdb";
        case HeatMethod::bound_upper_thm22: return "bound-upper-thm22";
        case HeatMethod::bound_lower_proxy: return "bound-lower-proxy";
    }
    return "?";
}

struct HeatSample {
    double s = 0.0;
    double E = 0.0;
    double stderr_ = 0.0;
    HeatMethod method = HeatMethod::fd;
    double gridH = 0.0;  // fd only
    int level = -1;      // construction level, -1 for a fixed polygon
};

/// Heat content samples E(s), ascending in s.
struct HeatProfile {
    std::vector<HeatSample> entries;
    std::uint64_t domainId = 0;

    void sort() {
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.s < b.s; });
    }
};

/// Exact heat content per unit boundary length of a half-plane,
/// sqrt(2s/pi), for the generator (1/2) Laplacian.
inline double half_plane_heat(double s) { return std::sqrt(2.0 * s / std::numbers::pi); }

struct FdOptions {
    double band = 7.0;        // active band half-width in units of sqrt(s_max)
    double theta_min = 0.5;   // cells closer than this (in h) to the boundary are slaved
    double courant = 0.125;   // upper limit of dt / (2 h^2)
    std::size_t max_cells = 150'000'000;
    bool check_simple = true;
};

namespace detail {

// Explicit solver for u_t = (1/2) Lap u, u = 1 on the boundary, u(0) = 0,
// on the cells of a uniform grid within a band of the boundary. Links that
// cross the boundary use Shortley-Weller weights with the exact crossing
// distance along the grid line; cells within theta_min*h of the boundary are
// not evolved but slaved to the linear interpolation between the boundary
// and their inner neighbour.
class FdSolver {
public:
    FdSolver(const Polyline& poly, double h, double reach, const FdOptions& opt) : opt_(opt) {
        grid_ = grid_covering(bounding_box(poly), h, 3);
        const Grid& g = grid_;
        if (g.nx >= (1u << 31) || g.ny >= (1u << 31)) throw ResourceCap("heat_fd: grid too large");

        // rows: crossings and band ranges
        rows_.resize(g.ny);
        RowSweep sweep(poly, reach);
        sweep.run_parallel(g, [&](const RowData& row) {
            RowInfo& ri = rows_[row.row];
            ri.crossings = row.crossings;
            const auto near = to_cell_ranges(g, row.near);
            for (std::size_t q = 0; q + 1 < row.crossings.size(); q += 2) {
                const Interval iv{row.crossings[q], row.crossings[q + 1]};
                const CellRange inside = cells_in(g, iv);
                if (inside.size() == 0) continue;
                ri.inside.push_back({inside, iv});
                for (const CellRange& r : intersect({inside}, near)) ri.band.push_back({r.lo, r.hi, 0});
            }
        });
        // columns: crossings of the vertical lines through cell centres
        Polyline tp = poly;
        for (Vec2& v : tp.vertices) std::swap(v.x, v.y);
        Grid tg{g.y0, g.x0, g.h, g.ny, g.nx};
        cols_.resize(g.nx);
        RowSweep(tp, 0.0).run_parallel(tg, [&](const RowData& row) { cols_[row.row] = row.crossings; });

        std::size_t total = 0;
        for (RowInfo& ri : rows_)
            for (BandSeg& b : ri.band) {
                b.base = total;
                total += static_cast<std::size_t>(b.hi - b.lo + 1);
            }
        if (total > opt_.max_cells) throw ResourceCap("heat_fd: " + std::to_string(total) + " band cells exceed the cap");
        n_ = total;

        // directional crossing distances (in units of h) and slaving
        dist_.assign(4 * n_, 0.0f);
        parallel_for(g.ny, [&](std::size_t j) {
            const RowInfo& ri = rows_[j];
            const double y = g.cy(j);
            for (const BandSeg& b : ri.band) {
                const Interval iv = interval_of(ri, b.lo);
                for (long i = b.lo; i <= b.hi; ++i) {
                    const std::size_t k = b.base + static_cast<std::size_t>(i - b.lo);
                    const double x = g.cx(static_cast<std::size_t>(i));
                    float* d = &dist_[4 * k];
                    d[kW] = static_cast<float>((x - iv.lo) / g.h);
                    d[kE] = static_cast<float>((iv.hi - x) / g.h);
                    const auto& cx = cols_[static_cast<std::size_t>(i)];
                    const auto pos = static_cast<std::size_t>(std::upper_bound(cx.begin(), cx.end(), y) - cx.begin());
                    if (pos % 2 == 1 && pos < cx.size()) {
                        d[kS] = static_cast<float>((y - cx[pos - 1]) / g.h);
                        d[kN] = static_cast<float>((cx[pos] - y) / g.h);
                    } else {
                        d[kS] = d[kN] = 0.0f;  // row and column tests disagree at rounding level
                    }
                }
            }
        });
        active_.assign(n_, -1);
        std::size_t m = 0;
        for (std::size_t k = 0; k < n_; ++k) {
            const float* d = &dist_[4 * k];
            if (std::min({d[0], d[1], d[2], d[3]}) >= opt_.theta_min) active_[k] = static_cast<std::int64_t>(m++);
        }
        m_ = m;
        build_stencils();
        build_quadrature(poly);
    }

    std::size_t active_cells() const noexcept { return m_; }
    std::size_t band_cells() const noexcept { return n_; }
    const Grid& grid() const noexcept { return grid_; }
    double max_diag() const noexcept { return max_a_; }

    /// Advances to each requested time (ascending) and returns E there.
    std::vector<double> run(const std::vector<double>& times) {
        std::vector<double> out(times.size(), 0.0);
        if (times.empty()) return out;
        const double h2 = grid_.h * grid_.h;
        const double c_max = std::min(opt_.courant, max_a_ > 0.0 ? 1.0 / max_a_ : opt_.courant);
        const double tmax = times.back();
        if (!(tmax > 0.0)) return out;
        const std::size_t steps = static_cast<std::size_t>(std::ceil(tmax / (2.0 * h2 * c_max) - 1e-9));
        const double dt = tmax / static_cast<double>(std::max<std::size_t>(steps, 1));
        const double c = dt / (2.0 * h2);

        // steps at which E is needed
        std::map<std::size_t, double> want;
        for (double t : times) {
            if (!(t > 0.0)) continue;
            const double f = t / dt;
            want[static_cast<std::size_t>(std::floor(f))] = 0.0;
            want[static_cast<std::size_t>(std::ceil(f))] = 0.0;
        }
        std::vector<double> u(m_ + 1, 0.0), un(m_ + 1, 0.0);
        auto record = [&](std::size_t step) {
            auto it = want.find(step);
            if (it == want.end()) return;
            it->second = content(u);
        };
        record(0);
        const std::size_t chunks = std::min<std::size_t>(m_, 8 * worker_count());
        for (std::size_t step = 1; step <= steps; ++step) {
            parallel_for(chunks, [&](std::size_t ch) {
                const std::size_t lo = m_ * ch / chunks, hi = m_ * (ch + 1) / chunks;
                for (std::size_t k = lo; k < hi; ++k) {
                    const std::uint32_t* nb = &nb_[4 * k];
                    un[k] = u[k] + c * (u[nb[0]] + u[nb[1]] + u[nb[2]] + u[nb[3]] - 4.0 * u[k]);
                }
            });
            parallel_for(std::min<std::size_t>(irr_.size(), chunks), [&](std::size_t ch) {
                const std::size_t cnt = std::min<std::size_t>(irr_.size(), chunks);
                const std::size_t lo = irr_.size() * ch / cnt, hi = irr_.size() * (ch + 1) / cnt;
                for (std::size_t q = lo; q < hi; ++q) {
                    const Irregular& r = irr_[q];
                    double acc = r.b - r.a * u[r.cell];
                    for (int l = 0; l < r.n; ++l) acc += r.coef[l] * u[r.idx[l]];
                    un[r.cell] = u[r.cell] + c * acc;
                }
            });
            un[m_] = 0.0;
            std::swap(u, un);
            if (want.count(step)) {
                const double mx = m_ ? *std::max_element(u.begin(), u.begin() + static_cast<long>(m_)) : 0.0;
                if (mx > 1.0 + 1e-9) throw NumericalFailure("heat_fd: solution left [0,1] (max " + std::to_string(mx) + ")");
                record(step);
            }
        }
        for (std::size_t q = 0; q < times.size(); ++q) {
            const double t = times[q];
            if (!(t > 0.0)) continue;
            const double f = t / dt;
            const auto k0 = static_cast<std::size_t>(std::floor(f)), k1 = static_cast<std::size_t>(std::ceil(f));
            const double e0 = want[k0], e1 = want[k1];
            out[q] = k0 == k1 ? e0 : e0 + (e1 - e0) * (f - static_cast<double>(k0));
        }
        return out;
    }

private:
    enum { kE = 0, kW = 1, kN = 2, kS = 3 };

    struct InsideSeg {
        CellRange cells;
        Interval iv;
    };
    struct BandSeg {
        long lo, hi;
        std::size_t base;
    };
    struct RowInfo {
        std::vector<double> crossings;
        std::vector<InsideSeg> inside;
        std::vector<BandSeg> band;
    };
    struct Irregular {
        std::uint32_t cell;
        int n = 0;
        std::uint32_t idx[8];
        double coef[8];
        double a = 0.0, b = 0.0;
    };
    struct Slave {
        std::int64_t master = -1;  // active index, or -1 for u = 1
        double alpha = 0.0;        // u = (1 - alpha) + alpha * u[master]
    };

    static const InsideSeg* segment_of(const RowInfo& ri, long i) {
        auto it = std::upper_bound(ri.inside.begin(), ri.inside.end(), i,
                                   [](long v, const InsideSeg& s) { return v < s.cells.lo; });
        if (it == ri.inside.begin()) return nullptr;
        --it;
        return i <= it->cells.hi ? &*it : nullptr;
    }

    static Interval interval_of(const RowInfo& ri, long i) {
        const InsideSeg* s = segment_of(ri, i);
        return s ? s->iv : Interval{0.0, 0.0};
    }

    // Band index of cell (i, j), -1 if inside but outside the band, -2 if outside.
    std::int64_t band_index(long i, long j) const {
        if (j < 0 || j >= static_cast<long>(grid_.ny)) return -2;
        const RowInfo& ri = rows_[static_cast<std::size_t>(j)];
        if (!segment_of(ri, i)) return -2;
        auto it = std::upper_bound(ri.band.begin(), ri.band.end(), i, [](long v, const BandSeg& b) { return v < b.lo; });
        if (it == ri.band.begin()) return -1;
        --it;
        if (i > it->hi) return -1;
        return static_cast<std::int64_t>(it->base + static_cast<std::size_t>(i - it->lo));
    }

    static constexpr long di[4] = {1, -1, 0, 0};
    static constexpr long dj[4] = {0, 0, 1, -1};
    static constexpr int opposite[4] = {kW, kE, kS, kN};

    Slave slave_of(std::size_t k, long i, long j) const {
        const float* d = &dist_[4 * k];
        int dir = 0;
        for (int q = 1; q < 4; ++q)
            if (d[q] < d[dir]) dir = q;
        Slave s;
        const int away = opposite[dir];
        if (d[away] < 1.0f) return s;
        const std::int64_t b = band_index(i + di[away], j + dj[away]);
        if (b < 0 || active_[static_cast<std::size_t>(b)] < 0) return s;
        s.master = active_[static_cast<std::size_t>(b)];
        s.alpha = d[dir] / (d[dir] + 1.0);
        return s;
    }

    void build_stencils() {
        nb_.assign(4 * m_, static_cast<std::uint32_t>(m_));
        cell_ij_.resize(n_);
        for (std::size_t j = 0; j < grid_.ny; ++j)
            for (const BandSeg& b : rows_[j].band)
                for (long i = b.lo; i <= b.hi; ++i)
                    cell_ij_[b.base + static_cast<std::size_t>(i - b.lo)] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};

        std::vector<std::vector<Irregular>> irr(grid_.ny);
        std::vector<double> amax(grid_.ny, 0.0);
        parallel_for(grid_.ny, [&](std::size_t j) {
            for (const BandSeg& b : rows_[j].band)
                for (long i = b.lo; i <= b.hi; ++i) {
                    const std::size_t k = b.base + static_cast<std::size_t>(i - b.lo);
                    if (active_[k] < 0) continue;
                    const auto me = static_cast<std::uint32_t>(active_[k]);
                    const float* d = &dist_[4 * k];
                    // per direction: theta and the linear form of the neighbour value
                    double theta[4];
                    Irregular r;
                    r.cell = me;
                    bool regular = true;
                    std::uint32_t reg_idx[4];
                    struct Link {
                        std::int64_t idx = -1;  // active index or -1
                        double coef = 0.0;      // multiplies u[idx]
                        double cst = 0.0;       // constant part
                    } link[4];
                    for (int q = 0; q < 4; ++q) {
                        if (d[q] < 1.0f) {
                            theta[q] = d[q];
                            link[q].cst = 1.0;
                            regular = false;
                            continue;
                        }
                        theta[q] = 1.0;
                        const std::int64_t nbk = band_index(i + di[q], static_cast<long>(j) + dj[q]);
                        if (nbk == -1) {
                            reg_idx[q] = static_cast<std::uint32_t>(m_);  // far interior, u = 0
                        } else if (nbk >= 0 && active_[static_cast<std::size_t>(nbk)] >= 0) {
                            link[q].idx = active_[static_cast<std::size_t>(nbk)];
                            link[q].coef = 1.0;
                            reg_idx[q] = static_cast<std::uint32_t>(link[q].idx);
                        } else if (nbk >= 0) {
                            const Slave sl = slave_of(static_cast<std::size_t>(nbk), i + di[q], static_cast<long>(j) + dj[q]);
                            link[q].cst = 1.0 - sl.alpha;
                            link[q].idx = sl.master;
                            link[q].coef = sl.master >= 0 ? sl.alpha : 0.0;
                            regular = false;
                        } else {
                            // outside although the crossing test says otherwise: treat as boundary
                            link[q].cst = 1.0;
                            regular = false;
                        }
                    }
                    if (regular) {
                        for (int q = 0; q < 4; ++q) nb_[4 * me + static_cast<std::size_t>(q)] = reg_idx[q];
                        amax[j] = std::max(amax[j], 4.0);
                        continue;
                    }
                    for (int axis = 0; axis < 2; ++axis) {
                        const int p = 2 * axis, q = 2 * axis + 1;
                        const double tp = theta[p], tq = theta[q];
                        const double w[2] = {2.0 / (tp * (tp + tq)), 2.0 / (tq * (tp + tq))};
                        const int dirs[2] = {p, q};
                        for (int s = 0; s < 2; ++s) {
                            const Link& L = link[dirs[s]];
                            r.a += w[s];
                            r.b += w[s] * L.cst;
                            if (L.idx >= 0 && L.coef != 0.0) {
                                r.idx[r.n] = static_cast<std::uint32_t>(L.idx);
                                r.coef[r.n] = w[s] * L.coef;
                                ++r.n;
                            }
                        }
                    }
                    amax[j] = std::max(amax[j], r.a);
                    irr[j].push_back(r);
                }
        });
        for (auto& v : irr) irr_.insert(irr_.end(), v.begin(), v.end());
        max_a_ = *std::max_element(amax.begin(), amax.end());
        max_a_ = std::max(max_a_, 4.0);
        // slaved cells, for the quadrature
        for (std::size_t k = 0; k < n_; ++k)
            if (active_[k] < 0) {
                const auto [i, j] = cell_ij_[k];
                slaves_.push_back({k, slave_of(k, i, j)});
            }
    }

    // E = h^2 [ sum over band cells of coverage * u + covered area of cells whose centre is outside ]
    void build_quadrature(const Polyline& poly) {
        const Coverage cov(poly, grid_);
        weight_.assign(n_, 1.0);
        double outside = 0.0;
        for (std::size_t j = 0; j < grid_.ny; ++j) {
            for (const auto& [i, w] : cov.row(j)) {
                const std::int64_t b = band_index(static_cast<long>(i), static_cast<long>(j));
                if (b >= 0) weight_[static_cast<std::size_t>(b)] = w;
                else if (b == -2) outside += w;
            }
        }
        outside_ = outside;
    }

    double content(const std::vector<double>& u) const {
        double s = outside_;
        for (std::size_t k = 0; k < n_; ++k)
            if (active_[k] >= 0) s += weight_[k] * u[static_cast<std::size_t>(active_[k])];
        for (const auto& [k, sl] : slaves_) {
            const double v = sl.master >= 0 ? (1.0 - sl.alpha) + sl.alpha * u[static_cast<std::size_t>(sl.master)] : 1.0;
            s += weight_[k] * v;
        }
        return s * grid_.h * grid_.h;
    }

    FdOptions opt_;
    Grid grid_;
    std::vector<RowInfo> rows_;
    std::vector<std::vector<double>> cols_;
    std::size_t n_ = 0, m_ = 0;
    std::vector<float> dist_;
    std::vector<std::int64_t> active_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cell_ij_;
    std::vector<std::uint32_t> nb_;
    std::vector<Irregular> irr_;
    std::vector<std::pair<std::size_t, Slave>> slaves_;
    std::vector<double> weight_;
    double outside_ = 0.0;
    double max_a_ = 4.0;
};

}  // namespace detail

/// Heat content by explicit finite differences on one grid of pitch gridH,
/// read at each requested time (linear interpolation between steps).
inline HeatProfile heat_fd(const Polyline& poly, std::vector<double> sList, double gridH, FdOptions opt = {}) {
    if (!poly.closed) throw InvalidDomain("heat_fd: polygon must be closed");
    if (!(gridH > 0.0)) throw InvalidParameter("heat_fd: gridH must be positive");
    for (double s : sList)
        if (!(s >= 0.0)) throw InvalidParameter("heat_fd: times must be >= 0");
    if (opt.check_simple && !simplicity_check(poly)) throw InvalidDomain("heat_fd: polygon is not simple");
    std::sort(sList.begin(), sList.end());
    HeatProfile prof;
    prof.domainId = content_hash(poly);
    if (sList.empty()) return prof;
    const auto firstPos = std::upper_bound(sList.begin(), sList.end(), 0.0);
    if (firstPos != sList.end() && gridH > 0.5 * std::sqrt(*firstPos))
        throw InvalidParameter("heat_fd: gridH must be <= sqrt(s)/2 at the smallest positive s");
    const double smax = sList.back();
    const double reach = opt.band * std::sqrt(smax) + 2.0 * gridH;
    detail::FdSolver solver(poly, gridH, reach, opt);
    const std::vector<double> E = solver.run(sList);
    for (std::size_t q = 0; q < sList.size(); ++q) prof.entries.push_back({sList[q], E[q], 0.0, HeatMethod::fd, gridH, -1});
    return prof;
}

/// One fd solve per time with gridH = sqrt(s)/cellsPerLength; `domain(s)`
/// supplies the polygon (and its construction level) for that time.
struct LeveledPolygon {
    const Polyline* poly;
    int level;
};

inline HeatProfile heat_fd_adaptive(const std::function<LeveledPolygon(double)>& domain, std::vector<double> sList,
                                    double cellsPerLength = 8.0, FdOptions opt = {}) {
    std::sort(sList.begin(), sList.end());
    HeatProfile prof;
    for (double s : sList) {
        if (!(s > 0.0)) {
            prof.entries.push_back({s, 0.0, 0.0, HeatMethod::fd, 0.0, -1});
            continue;
        }
        const LeveledPolygon lp = domain(s);
        const double h = std::sqrt(s) / cellsPerLength;
        HeatProfile one = heat_fd(*lp.poly, {s}, h, opt);
        one.entries[0].level = lp.level;
        prof.entries.push_back(one.entries[0]);
        prof.domainId = one.domainId;
    }
    return prof;
}

inline HeatProfile heat_fd_adaptive(const Polyline& poly, std::vector<double> sList, double cellsPerLength = 8.0,
                                    FdOptions opt = {}) {
    if (opt.check_simple && !simplicity_check(poly)) throw InvalidDomain("heat_fd: polygon is not simple");
    opt.check_simple = false;
    return heat_fd_adaptive([&](double) { return LeveledPolygon{&poly, -1}; }, std::move(sList), cellsPerLength, opt);
}

/// Snowflake heat profile: for each s the level with eps_n <= sqrt(s)/4.
inline HeatProfile heat_fd_snowflake(const ScaleSequence& seq, std::vector<double> sList, double cellsPerLength = 8.0,
                                     FdOptions opt = {}, std::size_t cap = kDefaultSegmentCap) {
    std::map<std::size_t, Polyline> polys;
    auto domain = [&](double s) {
        const std::size_t n = level_for(seq, std::sqrt(s) / 4.0);
        auto it = polys.find(n);
        if (it == polys.end()) {
            Polyline p = snowflake(seq, n, cap);
            if (!simplicity_check(p)) throw InvalidDomain("snowflake level " + std::to_string(n) + " is not simple");
            it = polys.emplace(n, std::move(p)).first;
        }
        return LeveledPolygon{&it->second, static_cast<int>(n)};
    };
    opt.check_simple = false;
    return heat_fd_adaptive(domain, std::move(sList), cellsPerLength, opt);
}

struct StepControl {
    double absorbHalo = -1.0;  // delta; negative means 1e-3 sqrt(s)
    double dtMax = -1.0;       // negative means s/10
    double rho = 0.5;
    double farCutoff = 8.0;    // survive once d > farCutoff * sqrt(remaining time)
};

struct McResult {
    double E = 0.0;
    double stderr_ = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;
};

/// Monte Carlo heat content: uniform start in D, planar Brownian motion with
/// steps min(dtMax, (rho d)^2), absorption within the halo, outside the
/// polygon, or by the Brownian-bridge crossing test exp(-2 d1 d2 / dt).
inline McResult heat_mc(const Polyline& poly, double s, std::uint64_t trials, StepControl ctl, std::uint64_t seed) {
    if (trials < 1) throw InvalidParameter("heat_mc: trials must be >= 1");
    if (!(s >= 0.0)) throw InvalidParameter("heat_mc: s must be >= 0");
    McResult res;
    res.trials = trials;
    if (s == 0.0) return res;
    const PolygonIndex index(poly);
    const double A = area(poly);
    const Box box = index.box();
    const double delta = ctl.absorbHalo > 0.0 ? ctl.absorbHalo : 1e-3 * std::sqrt(s);
    const double dtMax = ctl.dtMax > 0.0 ? ctl.dtMax : s / 10.0;
    const std::size_t chunks = std::min<std::uint64_t>(trials, 64 * worker_count());
    std::vector<std::uint64_t> hits(chunks, 0);
    parallel_for(chunks, [&](std::size_t ch) {
        const std::uint64_t lo = trials * ch / chunks, hi = trials * (ch + 1) / chunks;
        std::uint64_t count = 0;
        for (std::uint64_t t = lo; t < hi; ++t) {
            CounterRng rng(derive_key(seed, t));
            Vec2 x;
            PolygonIndex::Nearest nx{};
            do {
                x = {box.lo.x + rng.uniform() * box.width(), box.lo.y + rng.uniform() * box.height()};
                nx = index.nearest(x);
            } while (!index.inside_from(x, nx));
            double time = 0.0;
            bool hit = false;
            for (;;) {
                const double d = nx.distance;
                if (d < delta) {
                    hit = true;
                    break;
                }
                const double remaining = s - time;
                if (remaining <= 0.0 || d > ctl.farCutoff * std::sqrt(remaining)) break;
                const double dt = std::min({dtMax, (ctl.rho * d) * (ctl.rho * d), remaining});
                double z0, z1;
                rng.normal2(z0, z1);
                const double sd = std::sqrt(dt);
                const Vec2 y{x.x + sd * z0, x.y + sd * z1};
                const auto ny = index.nearest(y);
                if (!index.inside_from(y, ny) || ny.distance < delta) {
                    hit = true;
                    break;
                }
                if (rng.uniform() < std::exp(-2.0 * d * ny.distance / dt)) {
                    hit = true;
                    break;
                }
                x = y;
                nx = ny;
                time += dt;
            }
            count += hit;
        }
        hits[ch] = count;
    });
    for (std::uint64_t h : hits) res.hits += h;
    const double p = static_cast<double>(res.hits) / static_cast<double>(trials);
    res.E = A * p;
    res.stderr_ = A * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    return res;
}

/// omega(s) for the upper bound: sqrt(4 s log^i(1/s)) with log^i the
/// i-fold iterated logarithm (i = 1 is the plain sqrt-log choice).
struct OmegaSchedule {
    enum class Kind { sqrt_log, iterated_log, custom };
    Kind kind = Kind::sqrt_log;
    int i = 1;
    std::function<double(double)> custom;

    static double iterated_log(double x, int i) {
        for (int k = 0; k < i; ++k) {
            if (!(x > 0.0)) return -HUGE_VAL;
            x = std::log(x);
        }
        return x;
    }

    bool valid(double s) const {
        if (!(s > 0.0)) return false;
        if (kind == Kind::custom) return static_cast<bool>(custom);
        const int depth = kind == Kind::sqrt_log ? 1 : i;
        return iterated_log(1.0 / s, depth) > 0.0;
    }

    double operator()(double s) const {
        if (!valid(s)) throw InvalidParameter("omega schedule not valid at s = " + std::to_string(s));
        if (kind == Kind::custom) return custom(s);
        const int depth = kind == Kind::sqrt_log ? 1 : i;
        return std::sqrt(4.0 * s * iterated_log(1.0 / s, depth));
    }
};

/// 2 s^{-1} int_0^inf eps exp(-eps^2/4s) mu(eps) d eps (d = 2).
inline double vdb_upper(const TubularProfile& profile, double s) {
    if (!(s > 0.0)) throw InvalidParameter("vdb_upper: s must be positive");
    if (profile.entries.size() < 2) throw InvalidParameter("vdb_upper: profile needs at least two samples");
    const double r = std::sqrt(s);
    const double hiNeed = 12.0 * r;
    if (profile.max_eps() < hiNeed && !profile.saturated())
        throw InvalidParameter("vdb_upper: profile must reach eps >= " + std::to_string(hiNeed) +
                               " or saturate at the domain area (largest sample " + std::to_string(profile.max_eps()) + ")");
    // integrate eps^2 exp(-eps^2/4s) mu(eps) over x = log eps on [lo, hi]
    const double lo = std::log(r * 1e-8), hi = std::log(hiNeed);
    auto f = [&](double x) {
        const double e = std::exp(x);
        return e * e * std::exp(-e * e / (4.0 * s)) * profile.mu_at(e);
    };
    auto trap = [&](std::size_t n) {
        const double step = (hi - lo) / static_cast<double>(n);
        double sum = 0.5 * (f(lo) + f(hi));
        for (std::size_t k = 1; k < n; ++k) sum += f(lo + step * static_cast<double>(k));
        return sum * step;
    };
    std::size_t n = 256;
    double prev = trap(n), cur = prev;
    for (int it = 0; it < 14; ++it) {
        n *= 2;
        cur = trap(n);
        if (std::abs(cur - prev) <= 1e-6 * std::abs(cur)) break;
        prev = cur;
    }
    // tail above hi with mu at its saturation value
    const double tail = 2.0 * s * std::exp(-hiNeed * hiNeed / (4.0 * s)) * profile.mu_at(hiNeed * 2.0);
    return 2.0 * (cur + tail) / s;
}

/// mu(omega(s)) + 4 vol exp(-omega(s)^2 / 4s) (d = 2).
inline double thm22_upper(const TubularProfile& profile, double s, const OmegaSchedule& omega, double vol) {
    const double w = omega(s);
    return profile.mu_at(w) + 4.0 * vol * std::exp(-w * w / (4.0 * s));
}

/// Banded refinement with omega_1 > ... > omega_{k+1}:
/// 4 vol s + 4 sum_{i<=k} mu(omega_i) exp(-omega_{i+1}^2/4s) + mu(omega_{k+1}).
inline double multiband_upper(const TubularProfile& profile, double s, int k, double vol) {
    if (k < 1) throw InvalidParameter("multiband_upper: k must be >= 1");
    std::vector<double> w;
    for (int i = 1; i <= k + 1; ++i) w.push_back(OmegaSchedule{OmegaSchedule::Kind::iterated_log, i, {}}(s));
    double b = 4.0 * vol * s + profile.mu_at(w.back());
    for (int i = 0; i < k; ++i) b += 4.0 * profile.mu_at(w[i]) * std::exp(-w[i + 1] * w[i + 1] / (4.0 * s));
    return b;
}

inline double lower_proxy(const TubularProfile& profile, double s, double c1, double c2) {
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw InvalidParameter("lower_proxy: c1, c2 must be positive");
    return c1 * profile.mu_at(c2 * std::sqrt(s));
}

struct HeatSlopeReport {
    std::vector<double> s, q, slope_at;  // q(s) = 1 - log E / log s; local slopes at midpoints
    double qMin = 0, qMed = 0, qMax = 0;  // over the tail window
    double dimMin = 0, dimMed = 0, dimMax = 0;  // 2 q
    double slopeDimMin = 0, slopeDimMed = 0, slopeDimMax = 0;  // 2 (1 - d log E / d log s)
    std::size_t tailCount = 0;
};

/// q(s) = 1 - log E(s) / log s per sample and local log-log slopes; the tail
/// window is the smaller-s fraction of the samples.
inline HeatSlopeReport log_slope(const HeatProfile& heat, double tailFraction = 0.5) {
    std::vector<double> s, E;
    for (const auto& e : heat.entries)
        if (e.s > 0.0 && e.s < 1.0 && e.E > 0.0) {
            s.push_back(e.s);
            E.push_back(e.E);
        }
    if (s.size() < 8) throw InvalidParameter("log_slope: need at least 8 samples with 0 < s < 1");
    if (std::log10(s.back() / s.front()) < 2.0 - 1e-9) throw InvalidParameter("log_slope: samples must span two decades");
    HeatSlopeReport r;
    r.s = s;
    for (std::size_t i = 0; i < s.size(); ++i) r.q.push_back(1.0 - std::log(E[i]) / std::log(s[i]));
    const auto sl = local_slopes(s, E, 2);
    for (const auto& w : sl) r.slope_at.push_back(w.value);
    const std::size_t tail = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(tailFraction * static_cast<double>(s.size()))));
    r.tailCount = tail;
    std::vector<double> qt(r.q.begin(), r.q.begin() + static_cast<long>(tail));
    r.qMin = *std::min_element(qt.begin(), qt.end());
    r.qMax = *std::max_element(qt.begin(), qt.end());
    r.qMed = median(qt);
    r.dimMin = 2 * r.qMin;
    r.dimMed = 2 * r.qMed;
    r.dimMax = 2 * r.qMax;
    std::vector<double> st(r.slope_at.begin(), r.slope_at.begin() + static_cast<long>(std::min(tail, r.slope_at.size())));
    std::vector<double> sd;
    for (double v : st) sd.push_back(2.0 * (1.0 - v));
    r.slopeDimMin = *std::min_element(sd.begin(), sd.end());
    r.slopeDimMax = *std::max_element(sd.begin(), sd.end());
    r.slopeDimMed = median(sd);
    return r;
}

struct AbelianReport {
    std::vector<double> s, ratio;
    double minRatio = 0, maxRatio = 0;
};

/// Ratio E(s) / (s^{1-gamma/2} Ltilde(1/s)) with L(1/eps) = mu(eps) eps^{gamma-2}
/// and Ltilde(x) = L(x^{1/2}/2), i.e. Ltilde(1/s) = mu(2 sqrt s) (2 sqrt s)^{gamma-2}.
inline AbelianReport abelian_check(const TubularProfile& tube, const HeatProfile& heat, double gamma) {
    AbelianReport r;
    r.minRatio = HUGE_VAL;
    r.maxRatio = -HUGE_VAL;
    for (const auto& e : heat.entries) {
        if (!(e.s > 0.0) || !(e.E > 0.0)) continue;
        const double eps = 2.0 * std::sqrt(e.s);
        const double Lt = tube.mu_at(eps) * std::pow(eps, gamma - 2.0);
        const double v = e.E / (std::pow(e.s, 1.0 - gamma / 2.0) * Lt);
        r.s.push_back(e.s);
        r.ratio.push_back(v);
        r.minRatio = std::min(r.minRatio, v);
        r.maxRatio = std::max(r.maxRatio, v);
    }
    return r;
}

struct ScalingReport {
    double lhs = 0.0;  // E_{rD}(s)
    double rhs = 0.0;  // r^2 E_D(s / r^2)
    double rel = 0.0;
};

/// E_{rD}(s) against r^2 E_D(s/r^2), both by heat_fd on grids of the same
/// absolute pitch sqrt(s)/cellsPerLength.
inline ScalingReport scaling_check(const Polyline& poly, double r, double s, double cellsPerLength = 8.0,
                                   FdOptions opt = {}) {
    if (!(r > 0.0)) throw InvalidParameter("scaling_check: r must be positive");
    if (!(s > 0.0)) throw InvalidParameter("scaling_check: s must be positive");
    if (opt.check_simple && !simplicity_check(poly)) throw InvalidDomain("scaling_check: polygon is not simple");
    opt.check_simple = false;
    const double h = std::sqrt(s) / cellsPerLength;
    ScalingReport rep;
    if (r == 1.0) {
        rep.lhs = rep.rhs = heat_fd(poly, {s}, h, opt).entries[0].E;
        return rep;
    }
    const Polyline scaled = transformed(poly, r, {0.0, 0.0});
    rep.lhs = heat_fd(scaled, {s}, h, opt).entries[0].E;
    rep.rhs = r * r * heat_fd(poly, {s / (r * r)}, h, opt).entries[0].E;
    rep.rel = std::abs(rep.lhs - rep.rhs) / std::max(std::abs(rep.lhs), 1e-300);
    return rep;
}

}  // namespace snowheat
