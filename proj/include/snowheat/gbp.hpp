#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "snowheat/error.hpp"
#include "snowheat/generator.hpp"
#include "snowheat/parallel.hpp"
#include "snowheat/rng.hpp"

namespace snowheat {

/// One atom of the offspring law: with probability p an individual has
/// `children` children, all born `offset` after it.
struct OffspringVariant {
    int type = 0;
    double p = 0.0;
    int children = 0;
    double offset = 0.0;
    long ell = 0;  // integer scale with offset = log(ell), 0 if none
};

/// Offspring law. Either a finite list of variants, or a point-process
/// sampler returning (offset, child type) pairs for an individual of a given type.
struct OffspringLaw {
    using Sampler = std::function<std::vector<std::pair<double, int>>(int type, CounterRng& rng)>;

    std::vector<OffspringVariant> variants;
    Sampler sampler;
    int rootType = 0;  // sampler laws only

    /// Snowflake law: type a has m(a) = 3a+1 children at offset log(2a+1).
    static OffspringLaw snowflake(const std::vector<int>& alphabet, const std::vector<double>& probs) {
        ScaleSequence::check_law(alphabet, probs);
        OffspringLaw law;
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            const BlockParam b = BlockParam::of(alphabet[i]);
            law.variants.push_back({alphabet[i], probs[i], b.m, b.log_ell(), b.ell});
        }
        return law;
    }

    /// Variant law with integer scales.
    static OffspringLaw from_scales(const std::vector<std::pair<int, long>>& childrenAndEll, const std::vector<double>& probs) {
        if (childrenAndEll.size() != probs.size()) throw InvalidParameter("law: sizes differ");
        OffspringLaw law;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const auto [m, ell] = childrenAndEll[i];
            if (ell < 2) throw InvalidParameter("law: scales must be >= 2");
            law.variants.push_back({static_cast<int>(i), probs[i], m, std::log(static_cast<double>(ell)), ell});
        }
        law.validate();
        return law;
    }

    static OffspringLaw from_sampler(Sampler s, int rootType = 0) {
        if (!s) throw InvalidParameter("law: empty sampler");
        OffspringLaw law;
        law.sampler = std::move(s);
        law.rootType = rootType;
        return law;
    }

    bool has_variants() const noexcept { return !variants.empty(); }

    void validate() const {
        if (sampler) return;
        if (variants.empty()) throw InvalidParameter("law: no variants");
        double total = 0.0;
        for (const auto& v : variants) {
            if (!(v.p >= 0.0)) throw InvalidParameter("law: probabilities must be >= 0");
            if (!(v.offset > 0.0)) throw InvalidParameter("law: birth offsets must be > 0");
            if (v.children < 0 || v.children > 1'000'000) throw InvalidParameter("law: child count out of range");
            total += v.p;
        }
        if (std::abs(total - 1.0) > 1e-12) throw InvalidParameter("law: probabilities must sum to 1");
    }

    double mean_children() const {
        double s = 0.0;
        for (const auto& v : variants) s += v.p * v.children;
        return s;
    }

    /// Variant index drawn from an individual's key.
    std::size_t draw(std::uint64_t key) const {
        const double u = keyed_uniform(key, 0);
        double acc = 0.0;
        for (std::size_t i = 0; i < variants.size(); ++i) {
            acc += variants[i].p;
            if (u < acc) return i;
        }
        for (std::size_t i = variants.size(); i-- > 0;)
            if (variants[i].p > 0.0) return i;
        return 0;
    }
};

/// Key of the root of the tree grown from `seed`; child i of x has key derive_key(key(x), i).
inline std::uint64_t root_key(std::uint64_t seed) noexcept { return mix64(seed ^ 0x5eedf1a7e5a17ULL); }

namespace detail {

struct Birth {
    double offset;
    int type;
};

// Offspring of an individual with the given key. For variant laws the type
// passed in is ignored and the individual's own type is drawn from its key.
inline int offspring(const OffspringLaw& law, std::uint64_t key, int type, std::vector<Birth>& out) {
    out.clear();
    if (law.sampler) {
        CounterRng rng(key, 1);
        for (const auto& [off, t] : law.sampler(type, rng)) {
            if (!(off > 0.0)) throw InvalidParameter("law sampler returned a non-positive offset");
            out.push_back({off, t});
        }
        return type;
    }
    const OffspringVariant& v = law.variants[law.draw(key)];
    out.assign(static_cast<std::size_t>(v.children), Birth{v.offset, -1});
    return v.type;
}

}  // namespace detail

struct Individual {
    std::uint32_t parent = 0;  // index into the tree; the root points to itself
    std::uint32_t child = 0;   // position among its siblings (0-based)
    int type = 0;
    double sigma = 0.0;
    std::uint64_t key = 0;
};

/// All individuals whose parent was born by tMax (plus the root), sorted by
/// birth time.
struct GbpTree {
    std::vector<Individual> individuals;
    double tMax = 0.0;
    std::uint64_t seed = 0;  // seed, or root key for trees grown from a key

    /// Address as the word of 1-based child positions, root = empty.
    std::vector<std::uint32_t> address(std::size_t i) const {
        std::vector<std::uint32_t> w;
        while (i != 0) {
            w.push_back(individuals[i].child + 1);
            i = individuals[i].parent;
        }
        std::reverse(w.begin(), w.end());
        return w;
    }

    /// Indices of the frontier at time t (sigma_parent <= t < sigma_x).
    std::vector<std::size_t> frontier(double t) const {
        check_time(t);
        std::vector<std::size_t> out;
        if (t < 0.0) return {0};
        for (std::size_t i = 1; i < individuals.size(); ++i) {
            const Individual& x = individuals[i];
            if (individuals[x.parent].sigma <= t && t < x.sigma) out.push_back(i);
        }
        return out;
    }

    void check_time(double t) const {
        if (t > tMax) throw InvalidParameter("time " + std::to_string(t) + " is beyond the simulated horizon " + std::to_string(tMax));
    }

    // prefix sums for M_t queries
    void index(double gamma) const {
        if (indexedGamma_ == gamma && !bornW_.empty()) return;
        const std::size_t n = individuals.size();
        bornSigma_.assign(n ? n - 1 : 0, 0.0);
        bornW_.assign(n, 0.0);
        std::vector<std::pair<double, double>> par;
        par.reserve(n);
        for (std::size_t i = 1; i < n; ++i) {
            const double w = std::exp(-gamma * individuals[i].sigma);
            bornSigma_[i - 1] = individuals[i].sigma;
            bornW_[i] = bornW_[i - 1] + w;
            par.push_back({individuals[individuals[i].parent].sigma, w});
        }
        std::stable_sort(par.begin(), par.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        parSigma_.resize(par.size());
        parW_.assign(par.size() + 1, 0.0);
        for (std::size_t i = 0; i < par.size(); ++i) {
            parSigma_[i] = par[i].first;
            parW_[i + 1] = parW_[i] + par[i].second;
        }
        indexedGamma_ = gamma;
    }

    mutable double indexedGamma_ = std::numeric_limits<double>::quiet_NaN();
    mutable std::vector<double> bornSigma_, bornW_, parSigma_, parW_;
};

inline constexpr std::size_t kDefaultPopulationCap = 10'000'000;

/// Grows the tree rooted at the given key in birth-time order up to tMax.
inline GbpTree simulate_tree_from_key(const OffspringLaw& law, double tMax, std::uint64_t rootKey,
                                      std::size_t cap = kDefaultPopulationCap) {
    law.validate();
    if (!(tMax >= 0.0)) throw InvalidParameter("simulate_tree: tMax must be >= 0");
    GbpTree tree;
    tree.tMax = tMax;
    tree.seed = rootKey;
    struct Pending {
        double sigma;
        std::uint64_t order;
        std::uint32_t parent, child;
        int type;
        std::uint64_t key;
        bool operator>(const Pending& o) const { return sigma != o.sigma ? sigma > o.sigma : order > o.order; }
    };
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
    std::uint64_t order = 0;
    queue.push({0.0, order++, 0, 0, law.rootType, rootKey});
    std::vector<detail::Birth> births;
    std::size_t total = 1;
    while (!queue.empty() && queue.top().sigma <= tMax) {
        const Pending p = queue.top();
        queue.pop();
        const auto self = static_cast<std::uint32_t>(tree.individuals.size());
        const int type = detail::offspring(law, p.key, p.type, births);
        tree.individuals.push_back({self == 0 ? 0 : p.parent, p.child, type, p.sigma, p.key});
        total += births.size();
        if (total > cap || total > std::numeric_limits<std::uint32_t>::max())
            throw ResourceCap("simulate_tree: population cap " + std::to_string(cap) + " exceeded at t = " + std::to_string(p.sigma));
        for (std::size_t i = 0; i < births.size(); ++i)
            queue.push({p.sigma + births[i].offset, order++, self, static_cast<std::uint32_t>(i), births[i].type,
                        derive_key(p.key, i)});
    }
    while (!queue.empty()) {
        const Pending p = queue.top();
        queue.pop();
        // unborn by tMax: record type without expanding
        const int type = law.sampler ? p.type : law.variants[law.draw(p.key)].type;
        tree.individuals.push_back({p.parent, p.child, type, p.sigma, p.key});
    }
    return tree;
}

inline GbpTree simulate_tree(const OffspringLaw& law, double tMax, std::uint64_t seed, std::size_t cap = kDefaultPopulationCap) {
    GbpTree tree = simulate_tree_from_key(law, tMax, root_key(seed), cap);
    tree.seed = seed;
    return tree;
}

/// M_t = sum over the frontier at t of exp(-gamma sigma_x); 1 for t < 0.
inline double martingale(const GbpTree& tree, double t, double gamma) {
    tree.check_time(t);
    if (t < 0.0) return 1.0;
    tree.index(gamma);
    const auto np = static_cast<std::size_t>(std::upper_bound(tree.parSigma_.begin(), tree.parSigma_.end(), t) - tree.parSigma_.begin());
    const auto nb = static_cast<std::size_t>(std::upper_bound(tree.bornSigma_.begin(), tree.bornSigma_.end(), t) - tree.bornSigma_.begin());
    return tree.parW_[np] - tree.bornW_[nb];
}

/// Bounded score function of age, zero for negative ages.
struct Characteristic {
    std::function<double(double)> phi;
    double bound = 0.0;
    bool twoSided = false;
    std::vector<double> breakpoints;  // discontinuities, for quadrature

    double operator()(double age) const { return age < 0.0 ? 0.0 : phi(age); }

    static Characteristic indicator(double a, double b) {
        if (!(a >= 0.0) || !(b > a)) throw InvalidParameter("indicator characteristic needs 0 <= a < b");
        return {[a, b](double t) { return t >= a && t < b ? 1.0 : 0.0; }, 1.0, false, {a, b}};
    }
    static Characteristic zero() {
        return {[](double) { return 0.0; }, 0.0, false, {}};
    }

    void validate() const {
        if (!phi) throw InvalidParameter("characteristic: no function");
        if (!std::isfinite(bound) || bound < 0.0) throw InvalidParameter("characteristic: needs a finite bound");
        if (twoSided)
            throw InvalidParameter("characteristic: two-sided characteristics must be truncated to [0, inf) first");
    }
};

/// Z^phi(t) = sum over individuals of phi(t - sigma_x).
inline double characteristic_count(const GbpTree& tree, const Characteristic& phi, double t) {
    phi.validate();
    tree.check_time(t);
    double z = 0.0;
    for (const Individual& x : tree.individuals) {
        if (x.sigma > t) break;
        z += phi(t - x.sigma);
    }
    return z;
}

struct StreamCounts {
    double t = 0.0;
    double M = 0.0;
    double Z = 0.0;
};

/// M_t and Z^phi(t) for several t by depth-first traversal without storing
/// the tree. Same realization as simulate_tree_from_key with the same key.
inline std::vector<StreamCounts> stream_counts_from_key(const OffspringLaw& law, const Characteristic& phi,
                                                        std::vector<double> times, double gamma, std::uint64_t rootKey,
                                                        std::size_t cap = 2'000'000'000) {
    law.validate();
    phi.validate();
    std::sort(times.begin(), times.end());
    std::vector<StreamCounts> out(times.size());
    for (std::size_t q = 0; q < times.size(); ++q) out[q].t = times[q];
    if (times.empty()) return out;
    const double tmax = times.back();
    struct Node {
        std::uint64_t key;
        int type;
        double sigma, parentSigma;
    };
    std::vector<Node> stack{{rootKey, law.rootType, 0.0, -HUGE_VAL}};
    std::vector<detail::Birth> births;
    std::size_t visited = 0;
    while (!stack.empty()) {
        const Node x = stack.back();
        stack.pop_back();
        if (++visited > cap) throw ResourceCap("stream_counts: population cap exceeded");
        const double w = std::exp(-gamma * x.sigma);
        for (StreamCounts& c : out) {
            if (x.parentSigma <= c.t && c.t < x.sigma) c.M += w;
            if (x.sigma <= c.t) c.Z += phi(c.t - x.sigma);
        }
        if (x.sigma > tmax) continue;
        detail::offspring(law, x.key, x.type, births);
        for (std::size_t i = births.size(); i-- > 0;)
            stack.push_back({derive_key(x.key, i), births[i].type, x.sigma + births[i].offset, x.sigma});
    }
    return out;
}

inline std::vector<StreamCounts> stream_counts(const OffspringLaw& law, const Characteristic& phi, std::vector<double> times,
                                               double gamma, std::uint64_t seed, std::size_t cap = 2'000'000'000) {
    return stream_counts_from_key(law, phi, std::move(times), gamma, root_key(seed), cap);
}

/// gamma with sum_a p_a m(a) exp(-gamma offset(a)) = 1, by bisection to
/// machine precision.
inline double malthusian(const OffspringLaw& law) {
    law.validate();
    if (!law.has_variants()) throw InvalidParameter("malthusian: needs a variant law");
    const double mean = law.mean_children();
    if (!(mean > 1.0)) throw InvalidParameter("malthusian: law is not supercritical (mean children " + std::to_string(mean) + "), no root");
    auto f = [&](double g) {
        double s = 0.0;
        for (const auto& v : law.variants) s += v.p * v.children * std::exp(-g * v.offset);
        return s - 1.0;
    };
    double maxM = 0.0, minOff = HUGE_VAL;
    for (const auto& v : law.variants)
        if (v.p > 0.0) {
            maxM = std::max(maxM, static_cast<double>(v.children));
            minOff = std::min(minOff, v.offset);
        }
    double lo = 0.0, hi = std::log(maxM) / minOff;
    if (f(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace detail {

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
    const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson on [a, b] to absolute tolerance tol.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-10) {
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// z(inf) = int_0^inf exp(-gamma s) phi(s) ds / sum_a p_a m(a) exp(-gamma offset) offset.
inline double nerman_limit(const OffspringLaw& law, const Characteristic& phi, double gamma) {
    phi.validate();
    law.validate();
    if (!law.has_variants()) throw InvalidParameter("nerman_limit: needs a variant law");
    if (!(gamma > 0.0)) throw InvalidParameter("nerman_limit: gamma must be positive");
    double den = 0.0;
    for (const auto& v : law.variants) den += v.p * v.children * std::exp(-gamma * v.offset) * v.offset;
    if (phi.bound == 0.0) return 0.0;
    // beyond T the tail is below 1e-13
    const double T = std::max(1.0, std::log(phi.bound / (gamma * 1e-13)) / gamma);
    std::vector<double> cuts{0.0};
    for (double b : phi.breakpoints)
        if (b > 0.0 && b < T) cuts.push_back(b);
    cuts.push_back(T);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double num = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        // evaluate strictly inside so one-sided jumps at the cuts do not matter
        const double pad = (b - a) * 1e-15;
        num += adaptive_simpson([&](double s) { return std::exp(-gamma * s) * phi(std::clamp(s, a + pad, b - pad)); }, a, b,
                                1e-10 / static_cast<double>(cuts.size()));
    }
    return num / den;
}

namespace detail {

inline std::vector<std::pair<long, int>> factorize(long v) {
    std::vector<std::pair<long, int>> f;
    for (long p = 2; p * p <= v; ++p) {
        int e = 0;
        while (v % p == 0) {
            v /= p;
            ++e;
        }
        if (e) f.push_back({p, e});
    }
    if (v > 1) f.push_back({v, 1});
    return f;
}

// a^p = b^q for some positive integers p, q  <=>  proportional prime signatures
inline bool multiplicatively_dependent(long a, long b) {
    const auto fa = factorize(a), fb = factorize(b);
    if (fa.size() != fb.size()) return false;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        if (fa[i].first != fb[i].first) return false;
        if (static_cast<long>(fa[i].second) * fb[0].second != static_cast<long>(fb[i].second) * fa[0].second) return false;
    }
    return true;
}

}  // namespace detail

/// True iff two atoms with positive probability have incommensurable
/// offsets (non-lattice law).
inline bool lattice_check(const OffspringLaw& law) {
    std::vector<const OffspringVariant*> live;
    for (const auto& v : law.variants)
        if (v.p > 0.0) live.push_back(&v);
    for (std::size_t i = 0; i < live.size(); ++i)
        for (std::size_t j = i + 1; j < live.size(); ++j) {
            const OffspringVariant &a = *live[i], &b = *live[j];
            if (a.ell >= 2 && b.ell >= 2) {
                if (!detail::multiplicatively_dependent(a.ell, b.ell)) return true;
                continue;
            }
            // no integer scales: rational ratio with small terms counts as lattice
            bool rational = false;
            for (int q = 1; q <= 64 && !rational; ++q) {
                const double p = a.offset / b.offset * q;
                rational = std::abs(p - std::round(p)) < 1e-12 * std::max(1.0, p);
            }
            if (!rational) return true;
        }
    return false;
}

struct XlogxReport {
    double value = 0.0;
    bool finite = true;
    std::vector<double> atoms;  // x_a = m(a) exp(-gamma offset(a))
};

/// E[xi_gamma(inf) (log xi_gamma(inf))_+] for a finite variant law.
inline XlogxReport xlogx_check(const OffspringLaw& law, double gamma) {
    law.validate();
    if (!law.has_variants()) throw InvalidParameter("xlogx_check: needs a variant law");
    XlogxReport r;
    for (const auto& v : law.variants) {
        const double x = v.children * std::exp(-gamma * v.offset);
        r.atoms.push_back(x);
        if (x > 1.0) r.value += v.p * x * std::log(x);
    }
    r.finite = std::isfinite(r.value);
    return r;
}

inline XlogxReport xlogx_check(const OffspringLaw& law) { return xlogx_check(law, malthusian(law)); }

struct EnsembleRow {
    double t = 0.0;
    double meanM = 0.0;
    double stderrM = 0.0;
    double meanZnorm = 0.0;    // mean of exp(-gamma t) Z^phi(t) / M_t
    double stderrZnorm = 0.0;
};

/// Seeds seed0 .. seed0+count-1, all times from one traversal per seed.
inline std::vector<EnsembleRow> gbp_ensemble(const OffspringLaw& law, const Characteristic& phi, const std::vector<double>& times,
                                             std::size_t count, std::uint64_t seed0) {
    if (count < 2) throw InvalidParameter("gbp_ensemble: need at least two seeds");
    const double gamma = malthusian(law);
    std::vector<std::vector<StreamCounts>> per(count);
    parallel_for(count, [&](std::size_t k) { per[k] = stream_counts(law, phi, times, gamma, seed0 + k); });
    std::vector<EnsembleRow> rows;
    for (std::size_t q = 0; q < per[0].size(); ++q) {
        std::vector<double> m, z;
        for (std::size_t k = 0; k < count; ++k) {
            m.push_back(per[k][q].M);
            z.push_back(std::exp(-gamma * per[k][q].t) * per[k][q].Z / per[k][q].M);
        }
        auto stats = [](const std::vector<double>& v) {
            const double n = static_cast<double>(v.size());
            const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            return std::pair{mean, std::sqrt(ss / (n - 1.0) / n)};
        };
        const auto [mm, ms] = stats(m);
        const auto [zm, zs] = stats(z);
        rows.push_back({per[0][q].t, mm, ms, zm, zs});
    }
    return rows;
}

}  // namespace snowheat
