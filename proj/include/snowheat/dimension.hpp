#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <bit>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "snowheat/error.hpp"
#include "snowheat/generator.hpp"
#include "snowheat/tubular.hpp"

namespace snowheat {

enum class DimMethod { exact_ratio, ergodic_formula, profile_regression, carpet_formula, heat_slope };

inline const char* to_string(DimMethod m) {
    switch (m) {
        case DimMethod::exact_ratio: return "exact-ratio";
        case DimMethod::ergodic_formula: return "ergodic-formula";
        case DimMethod::profile_regression: return "profile-regression";
        case DimMethod::carpet_formula: return "carpet-formula";
        case DimMethod::heat_slope: return "heat-slope";
    }
    return "?";
}

/// One diagnostic window: a position range and the value seen there.
struct DimWindow {
    double from = 0.0;
    double to = 0.0;
    double value = 0.0;
    std::string tag;
};

struct DimEstimate {
    double lower = 0.0;
    double upper = 0.0;
    double estimate = 0.0;
    DimMethod method = DimMethod::exact_ratio;
    std::vector<DimWindow> windows;
};

/// Growth model for the ergodic-theorem error g(n).
struct RateFunction {
    enum class Kind { constant, power_law, iterated_log, custom_table };
    Kind kind = Kind::constant;
    double theta = 0.0;
    std::string description;
    std::vector<std::pair<double, double>> table;

    double operator()(double n) const {
        switch (kind) {
            case Kind::constant: return 1.0;
            case Kind::power_law: return std::pow(n, theta);
            case Kind::iterated_log: return n > std::exp(std::numbers::e) ? std::sqrt(n * std::log(std::log(n))) : 0.0;
            case Kind::custom_table: {
                if (table.empty()) return 0.0;
                auto it = std::lower_bound(table.begin(), table.end(), std::pair{n, -HUGE_VAL});
                if (it == table.end()) return table.back().second;
                return it->second;
            }
        }
        return 0.0;
    }
    bool slowly_varying() const { return kind != Kind::power_law || theta == 0.0; }
};

namespace detail {

// Letter counts of xi_1..xi_n, kept exactly as integers.
struct LetterCounts {
    std::map<int, std::size_t> c;

    void add(int a) { ++c[a]; }
    double log_M() const {
        double s = 0.0;
        for (auto [a, k] : c) s += static_cast<double>(k) * BlockParam::of(a).log_m();
        return s;
    }
    double log_L() const {
        double s = 0.0;
        for (auto [a, k] : c) s += static_cast<double>(k) * BlockParam::of(a).log_ell();
        return s;
    }
    double ratio() const { return log_M() / log_L(); }
};

}  // namespace detail

/// log M_n / log L_n from exact letter counts.
inline double dim_ratio(const ScaleSequence& seq, std::size_t n) {
    if (n == 0) throw InvalidParameter("dim_ratio: n must be >= 1 (0/0 at n = 0)");
    detail::LetterCounts lc;
    for (std::size_t i = 1; i <= n; ++i) lc.add(seq[i]);
    return lc.ratio();
}

/// Min and max of the ratio over the tail [N/2, N]; for the block rule the
/// block endpoints 2^{2k}, 2^{2k+1} <= N are reported as extra windows.
inline DimEstimate liminf_limsup_dim(const ScaleSequence& seq, std::size_t N) {
    if (N < 2) throw InvalidParameter("liminf_limsup_dim: N must be >= 2");
    DimEstimate est;
    est.method = DimMethod::exact_ratio;
    est.lower = HUGE_VAL;
    est.upper = -HUGE_VAL;
    detail::LetterCounts lc;
    const std::size_t start = N / 2;
    const bool blocks = seq.kind() == ScaleSequence::Kind::rule_example33;
    for (std::size_t n = 1; n <= N; ++n) {
        lc.add(seq[n]);
        const bool endpoint = blocks && std::has_single_bit(n) && n >= 4;
        if (n < start && !endpoint) continue;
        const double r = lc.ratio();
        if (n >= start) {
            est.lower = std::min(est.lower, r);
            est.upper = std::max(est.upper, r);
        }
        if (endpoint) est.windows.push_back({double(n), double(n), r, "block-endpoint"});
    }
    est.windows.push_back({double(start), double(N), est.lower, "tail-min"});
    est.windows.push_back({double(start), double(N), est.upper, "tail-max"});
    est.estimate = 0.5 * (est.lower + est.upper);
    return est;
}

/// sum p_a log m(a) / sum p_a log l(a).
inline double ergodic_dim(const std::vector<int>& alphabet, const std::vector<double>& probs) {
    if (alphabet.empty()) throw InvalidParameter("ergodic_dim: empty alphabet");
    ScaleSequence::check_law(alphabet, probs);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
        const BlockParam b = BlockParam::of(alphabet[i]);
        num += probs[i] * b.log_m();
        den += probs[i] * b.log_ell();
    }
    return num / den;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

/// Least-squares slopes of log y against log x over sliding windows of
/// `width` consecutive points (width 2 gives the pairwise local slopes).
inline std::vector<DimWindow> local_slopes(const std::vector<double>& x, const std::vector<double>& y,
                                           std::size_t width = 2) {
    std::vector<DimWindow> out;
    if (width < 2) width = 2;
    for (std::size_t i = 0; i + width <= x.size(); ++i) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t k = i; k < i + width; ++k) {
            const double lx = std::log(x[k]), ly = std::log(y[k]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double n = static_cast<double>(width);
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        out.push_back({x[i], x[i + width - 1], slope, "slope"});
    }
    return out;
}

/// Dimension 2 - slope of log mu against log eps: median of the local slopes
/// as the estimate, their extremes as lower/upper.
inline DimEstimate profile_dim(const TubularProfile& profile, std::size_t width = 2) {
    std::vector<double> xs, ys;
    for (const auto& e : profile.entries)
        if (e.mu > 0.0) {
            xs.push_back(e.eps);
            ys.push_back(e.mu);
        }
    if (xs.size() < 8) throw InvalidParameter("profile_dim: need at least 8 samples with mu > 0");
    if (std::log10(xs.back() / xs.front()) < 2.0 - 1e-9)
        throw InvalidParameter("profile_dim: samples must span at least two decades of eps");
    DimEstimate est;
    est.method = DimMethod::profile_regression;
    est.windows = local_slopes(xs, ys, width);
    std::vector<double> dims;
    for (auto& w : est.windows) {
        w.value = 2.0 - w.value;
        w.tag = "dimension";
        dims.push_back(w.value);
    }
    est.lower = *std::min_element(dims.begin(), dims.end());
    est.upper = *std::max_element(dims.begin(), dims.end());
    est.estimate = median(dims);
    return est;
}

/// psi(x) = sqrt(log x * log log log x), defined for x > e^e.
inline double lil_envelope(double x) {
    if (!(x > std::exp(std::numbers::e))) throw DomainError("lil_envelope: x must exceed e^e");
    return std::sqrt(std::log(x) * std::log(std::log(std::log(x))));
}

/// Path S_n = log(M_n L_n^{-gamma}), n = 1..N.
inline std::vector<double> lil_path(const ScaleSequence& seq, std::size_t N, double gamma) {
    std::vector<double> path(N);
    double s = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        const BlockParam b = BlockParam::of(seq[n]);
        s += b.log_m() - gamma * b.log_ell();
        path[n - 1] = s;
    }
    return path;
}

struct LilFit {
    double C = 0.0;          // smallest C with |S_n| <= C sqrt(n log log n) on the tail
    std::size_t from = 0;    // first n of the tail
    double fraction = 0.25;  // excursion level as a fraction of C
    std::size_t above = 0;   // n with S_n >  fraction * C * envelope
    std::size_t below = 0;   // n with S_n < -fraction * C * envelope
    std::size_t above_half = 0;
    std::size_t below_half = 0;
};

/// Fits the LIL envelope sqrt(n log log n) to a path S_1..S_N.
inline LilFit lil_fit(const std::vector<double>& path, double fraction = 0.25, std::size_t from = 10) {
    if (path.size() < 1000) throw InvalidParameter("lil_fit: path must have at least 1000 points");
    LilFit f;
    f.from = from;
    f.fraction = fraction;
    auto env = [](std::size_t n) {
        const double x = static_cast<double>(n);
        return std::sqrt(x * std::log(std::log(x)));
    };
    for (std::size_t n = from; n <= path.size(); ++n) f.C = std::max(f.C, std::abs(path[n - 1]) / env(n));
    for (std::size_t n = from; n <= path.size(); ++n) {
        const double e = env(n), v = path[n - 1];
        if (v > fraction * f.C * e) ++f.above;
        if (v < -fraction * f.C * e) ++f.below;
        if (v > 0.5 * f.C * e) ++f.above_half;
        if (v < -0.5 * f.C * e) ++f.below_half;
    }
    return f;
}

}  // namespace snowheat
