#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <type_traits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "snowheat/error.hpp"
#include "snowheat/geometry.hpp"
#include "snowheat/rng.hpp"
#include "snowheat/simplicity.hpp"

namespace snowheat {

using BigInt = boost::multiprecision::cpp_int;

/// Alphabet element a with its block counts m(a) = 3a+1, l(a) = 2a+1.
struct BlockParam {
    int a = 1;
    int m = 4;
    int ell = 3;

    static BlockParam of(int a) {
        if (a < 1) throw InvalidParameter("block parameter a must be >= 1, got " + std::to_string(a));
        return {a, 3 * a + 1, 2 * a + 1};
    }
    double log_m() const noexcept { return std::log(static_cast<double>(m)); }
    double log_ell() const noexcept { return std::log(static_cast<double>(ell)); }
};

/// Largest admissible alphabet element. The theory needs a bounded alphabet;
/// this only keeps block sizes sane.
inline constexpr int kMaxBlock = 1 << 16;

/// The sequence xi_1, xi_2, ... driving the construction. Indices are 1-based.
class ScaleSequence {
public:
    enum class Kind { explicit_list, iid, rule_example33 };

    /// Explicit values; the list is repeated periodically past its end, so a
    /// one-element list is a constant sequence.
    static ScaleSequence explicit_list(std::vector<int> values) {
        if (values.empty()) throw InvalidParameter("explicit sequence needs at least one value");
        for (int v : values) check_letter(v);
        ScaleSequence s;
        s.kind_ = Kind::explicit_list;
        s.values_ = std::move(values);
        return s;
    }

    static ScaleSequence constant(int a) { return explicit_list({a}); }

    static ScaleSequence iid(std::vector<int> alphabet, std::vector<double> probs, std::uint64_t seed) {
        check_law(alphabet, probs);
        ScaleSequence s;
        s.kind_ = Kind::iid;
        s.values_ = std::move(alphabet);
        s.probs_ = std::move(probs);
        s.seed_ = seed;
        return s;
    }

    static ScaleSequence example33() {
        ScaleSequence s;
        s.kind_ = Kind::rule_example33;
        s.values_ = {1, 2};
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<double>& probs() const noexcept { return probs_; }

    /// xi_n for n >= 1.
    int operator[](std::size_t n) const;

    std::vector<int> prefix(std::size_t n) const {
        std::vector<int> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = (*this)[i + 1];
        return out;
    }

    /// Letters the sequence can take, ascending.
    std::vector<int> alphabet() const {
        std::vector<int> a = values_;
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        return a;
    }

    /// Short stable text form, e.g. "explicit:1,3,2", "iid:1,2@0.5,0.5#7", "rule:example33".
    std::string descriptor() const {
        auto join = [](const auto& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += ',';
                if constexpr (std::is_same_v<std::decay_t<decltype(v[0])>, double>) {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
                    s += buf;
                } else {
                    s += std::to_string(v[i]);
                }
            }
            return s;
        };
        switch (kind_) {
            case Kind::explicit_list: return "explicit:" + join(values_);
            case Kind::iid: return "iid:" + join(values_) + "@" + join(probs_) + "#" + std::to_string(seed_);
            case Kind::rule_example33: return "rule:example33";
        }
        return {};
    }

    static void check_law(const std::vector<int>& alphabet, const std::vector<double>& probs) {
        if (alphabet.empty()) throw InvalidParameter("empty alphabet");
        if (alphabet.size() != probs.size()) throw InvalidParameter("alphabet and probs differ in length");
        double total = 0.0;
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            check_letter(alphabet[i]);
            if (!(probs[i] >= 0.0)) throw InvalidParameter("probabilities must be >= 0");
            total += probs[i];
        }
        if (std::abs(total - 1.0) > 1e-12) throw InvalidParameter("probabilities must sum to 1");
        std::vector<int> sorted = alphabet;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw InvalidParameter("alphabet has repeated letters");
    }

private:
    static void check_letter(int a) {
        if (a < 1 || a > kMaxBlock) throw InvalidParameter("alphabet element out of range: " + std::to_string(a));
    }

    Kind kind_ = Kind::explicit_list;
    std::vector<int> values_;
    std::vector<double> probs_;
    std::uint64_t seed_ = 0;
};

/// 1 on S = union over k >= 1 of {2^{2k}+1, ..., 2^{2k+1}}, else 2.
inline int example_33_sequence(std::size_t n) {
    if (n < 1) throw InvalidParameter("example33 index starts at 1");
    // n in {2^{2k}+1..2^{2k+1}}  <=>  n-1 has its top bit at an even position >= 2
    const std::uint64_t v = static_cast<std::uint64_t>(n) - 1;
    if (v < 4) return 2;
    const int top = 63 - std::countl_zero(v);
    return top % 2 == 0 ? 1 : 2;
}

inline int ScaleSequence::operator[](std::size_t n) const {
    if (n < 1) throw InvalidParameter("sequence index starts at 1");
    switch (kind_) {
        case Kind::explicit_list: return values_[(n - 1) % values_.size()];
        case Kind::rule_example33: return example_33_sequence(n);
        case Kind::iid: {
            const double u = keyed_uniform(seed_, n);
            double acc = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                acc += probs_[i];
                if (u < acc) return values_[i];
            }
            for (std::size_t i = values_.size(); i-- > 0;)
                if (probs_[i] > 0.0) return values_[i];
        }
    }
    return values_.front();
}

struct Counts {
    std::size_t n = 0;
    BigInt M = 1;
    BigInt L = 1;
    double eps = 1.0;
};

/// Exact M_n = prod m(xi_i), L_n = prod l(xi_i).
inline Counts counts(const ScaleSequence& seq, std::size_t n) {
    Counts c;
    c.n = n;
    for (std::size_t i = 1; i <= n; ++i) {
        const BlockParam b = BlockParam::of(seq[i]);
        c.M *= b.m;
        c.L *= b.ell;
    }
    c.eps = 1.0 / c.L.convert_to<double>();
    return c;
}

/// K(a): open polyline (0,0) -> (1,0), 2a+1 cells with equilateral spikes on
/// the odd cells.
inline Polyline block_generator(int a) {
    const BlockParam b = BlockParam::of(a);
    const double w = 1.0 / b.ell;
    const double apex = std::numbers::sqrt3 / 2.0 * w;
    Polyline p;
    p.closed = false;
    p.vertices.reserve(static_cast<std::size_t>(b.m) + 1);
    p.vertices.push_back({0.0, 0.0});
    for (int c = 0; c < b.ell; ++c) {
        if (c % 2 == 1) p.vertices.push_back({(c + 0.5) * w, apex});
        p.vertices.push_back({c + 1 == b.ell ? 1.0 : (c + 1) * w, 0.0});
    }
    return p;
}

inline constexpr std::size_t kDefaultSegmentCap = 100'000'000;

namespace detail {

// Image of a unit-frame point on the directed segment p -> q (left normal up).
inline Vec2 place(Vec2 v, Vec2 p, Vec2 q) noexcept {
    const Vec2 d = q - p;
    return {p.x + v.x * d.x - v.y * d.y, p.y + v.x * d.y + v.y * d.x};
}

inline void check_cap(const BigInt& M, std::size_t cap, std::size_t n) {
    if (M > cap)
        throw ResourceCap("level " + std::to_string(n) + " needs " + M.str() + " segments, cap is " +
                          std::to_string(cap));
}

}  // namespace detail

/// K(xi_1, ..., xi_n) from (0,0) to (1,0); level i replaces every segment by
/// a scaled copy of K(xi_i).
inline Polyline koch_curve(const ScaleSequence& seq, std::size_t n, std::size_t cap = kDefaultSegmentCap) {
    detail::check_cap(counts(seq, n).M, cap, n);
    Polyline cur;
    cur.closed = false;
    cur.vertices = {{0.0, 0.0}, {1.0, 0.0}};
    for (std::size_t level = 1; level <= n; ++level) {
        const Polyline block = block_generator(seq[level]);
        const std::size_t bm = block.vertices.size() - 1;
        Polyline next;
        next.closed = false;
        next.vertices.reserve((cur.vertices.size() - 1) * bm + 1);
        next.vertices.push_back(cur.vertices.front());
        for (std::size_t s = 0; s + 1 < cur.vertices.size(); ++s) {
            const Vec2 p = cur.vertices[s], q = cur.vertices[s + 1];
            for (std::size_t i = 1; i < bm; ++i) next.vertices.push_back(detail::place(block.vertices[i], p, q));
            next.vertices.push_back(q);  // exact copy keeps the coarse vertices nested
        }
        cur = std::move(next);
    }
    return cur;
}

/// Base triangle, clockwise, so the left side of each directed edge faces out.
inline std::array<Vec2, 3> snowflake_base() noexcept {
    return {Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.5, -std::numbers::sqrt3 / 2.0}};
}

/// Closes three copies of a unit-frame open curve on the base triangle.
inline Polyline close_on_triangle(const Polyline& unit) {
    const auto base = snowflake_base();
    Polyline p;
    p.closed = true;
    const std::size_t k = unit.vertices.size() - 1;
    p.vertices.reserve(3 * k);
    for (int side = 0; side < 3; ++side) {
        const Vec2 a = base[side], b = base[(side + 1) % 3];
        p.vertices.push_back(a);
        for (std::size_t i = 1; i < k; ++i) p.vertices.push_back(detail::place(unit.vertices[i], a, b));
    }
    return p;
}

/// Closed snowflake polygon: K(xi) on each side of the unit triangle, spikes outward.
inline Polyline snowflake(const ScaleSequence& seq, std::size_t n, std::size_t cap = kDefaultSegmentCap) {
    detail::check_cap(3 * counts(seq, n).M, cap, n);
    return close_on_triangle(koch_curve(seq, n, cap));
}

}  // namespace snowheat
