#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "snowheat/error.hpp"
#include "snowheat/generator.hpp"
#include "snowheat/tubular.hpp"

using namespace snowheat;

namespace {

Polyline regular_gon(int n) {
    Polyline p;
    p.closed = true;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        p.vertices.push_back({std::cos(t), std::sin(t)});
    }
    return p;
}

}  // namespace

TEST(Tubular, SquareExact) {
    const Polyline sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true};
    for (double eps : {0.01, 0.05, 0.2}) {
        const TubeVolume v = tube_volume(sq, eps, eps / 16.0);
        const double exact = 1.0 - (1.0 - 2.0 * eps) * (1.0 - 2.0 * eps);
        EXPECT_NEAR(v.mu, exact, std::max(v.muErr, 1e-12)) << eps;
        EXPECT_LT(std::abs(v.mu - exact) / exact, 0.01);
    }
    EXPECT_NEAR(tube_volume(sq, 0.6, 0.01).mu, 1.0, 1e-12);
}

// Inner parallel set of a regular n-gon with inradius r is the n-gon of inradius r - eps.
TEST(Tubular, RegularPolygonExact) {
    const int n = 64;
    const Polyline p = regular_gon(n);
    const double r = std::cos(std::numbers::pi / n), t = std::tan(std::numbers::pi / n);
    for (double eps : {0.02, 0.1}) {
        const double exact = n * t * (r * r - (r - eps) * (r - eps));
        const TubeVolume v = tube_volume(p, eps, eps / 8.0);
        EXPECT_NEAR(v.mu, exact, v.muErr);
        EXPECT_LT(std::abs(v.mu / exact - 1.0), 0.01);
    }
}

TEST(Tubular, RejectsBadInput) {
    const Polyline bowtie{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}, true};
    EXPECT_THROW(tube_volume(bowtie, 0.1, 0.01), InvalidDomain);
    const Polyline open{{{0, 0}, {1, 0}, {1, 1}}, false};
    EXPECT_THROW(tube_volume(open, 0.1, 0.01), InvalidDomain);
    const Polyline sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true};
    EXPECT_THROW(tube_volume(sq, -1.0, 0.01), InvalidParameter);
}

TEST(Tubular, ProfileIsMonotoneAndSaturates) {
    const Polyline p = snowflake(ScaleSequence::constant(1), 3);
    const TubularProfile prof = tube_profile(p, {0.005, 0.01, 0.02, 0.05, 0.1, 0.3, 0.6});
    for (std::size_t i = 1; i < prof.entries.size(); ++i) EXPECT_GE(prof.entries[i].mu, prof.entries[i - 1].mu);
    EXPECT_TRUE(prof.saturated());
    EXPECT_NEAR(prof.mu_at(5.0), area(p), 1e-12);
    const double mid = prof.mu_at(0.0141);
    EXPECT_GT(mid, prof.entries[1].mu);
    EXPECT_LT(mid, prof.entries[2].mu);
}

TEST(Tubular, LevelChoice) {
    const auto s = ScaleSequence::constant(1);
    EXPECT_EQ(level_for(s, 1.0 / 9.0), 2u);
    EXPECT_EQ(level_for(s, 0.1), 3u);
    const TubularProfile prof = tube_profile(s, {0.01, 0.03});
    EXPECT_EQ(prof.entries[0].level, 6);
}

TEST(Tubular, SpikeSandwich) {
    for (auto seq : {ScaleSequence::constant(1), ScaleSequence::constant(2)})
        for (std::size_t n : {2u, 3u}) {
            const SpikeBounds b = spike_bounds(seq, n);
            const double eps = counts(seq, n).eps;
            const TubeVolume v = tube_volume(snowflake(seq, n), eps, eps / 8.0);
            EXPECT_GE(v.mu + v.muErr, b.lower);
            EXPECT_LE(v.mu - v.muErr, b.upper);
        }
}
