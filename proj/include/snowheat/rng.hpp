#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace snowheat {

// Counter-based random streams. A stream is identified by a 64-bit key; the
// i-th draw of a stream is a pure function of (key, i), so results never
// depend on the order in which streams are consumed.

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Key of child stream `index` below `parent`.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(parent ^ mix64(index + 0x632be59bd9b4e019ULL));
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    constexpr explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    constexpr result_type operator()() noexcept {
        return mix64(key_ + 0xd1b54a32d192ed03ULL * (++counter_));
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() noexcept { return 1.0 - uniform(); }

    /// Standard normal pair by Box-Muller; implementation-independent, unlike
    /// std::normal_distribution.
    void normal2(double& z0, double& z1) noexcept {
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double t = 2.0 * std::numbers::pi * uniform();
        z0 = r * std::cos(t);
        z1 = r * std::sin(t);
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// Uniform draw at a fixed (key, index) without materializing a stream.
inline double keyed_uniform(std::uint64_t key, std::uint64_t index) noexcept {
    return static_cast<double>(derive_key(key, index) >> 11) * 0x1.0p-53;
}

}  // namespace snowheat
