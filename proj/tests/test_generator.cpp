#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "snowheat/error.hpp"
#include "snowheat/generator.hpp"
#include "snowheat/geometry.hpp"

using namespace snowheat;

TEST(Generator, ExactCountsForConstantSequence) {
    const Counts c = counts(ScaleSequence::constant(1), 30);
    EXPECT_EQ(c.M.str(), "1152921504606846976");  // 4^30
    EXPECT_EQ(c.L.str(), "205891132094649");      // 3^30
    const Counts d = counts(ScaleSequence::explicit_list({1, 3, 2}), 3);
    EXPECT_EQ(d.M, BigInt(4 * 10 * 7));
    EXPECT_EQ(d.L, BigInt(3 * 7 * 5));
}

TEST(Generator, BlockShape) {
    for (int a = 1; a <= 4; ++a) {
        const Polyline k = block_generator(a);
        EXPECT_EQ(k.segment_count(), static_cast<std::size_t>(3 * a + 1));
        const double w = 1.0 / (2 * a + 1);
        for (std::size_t i = 0; i < k.segment_count(); ++i) EXPECT_NEAR(norm(k.seg_b(i) - k.seg_a(i)), w, 1e-15);
    }
}

TEST(Generator, KochCurveSegmentsAndEndpoints) {
    const auto seq = ScaleSequence::explicit_list({1, 3, 2, 1});
    for (std::size_t n = 0; n <= 4; ++n) {
        const Polyline k = koch_curve(seq, n);
        const Counts c = counts(seq, n);
        ASSERT_EQ(k.segment_count(), c.M.convert_to<std::size_t>());
        EXPECT_NEAR(k.vertices.front().x, 0.0, 1e-15);
        EXPECT_NEAR(k.vertices.back().x, 1.0, 1e-12);
        EXPECT_NEAR(k.vertices.back().y, 0.0, 1e-12);
        for (std::size_t i = 0; i < k.segment_count(); ++i) EXPECT_NEAR(norm(k.seg_b(i) - k.seg_a(i)), c.eps, 1e-12);
    }
}

// Each refinement adds a_k spikes per segment: equilateral triangles of side 1/L_k.
TEST(Generator, SnowflakeAreaMatchesSpikeSum) {
    const auto seq = ScaleSequence::explicit_list({1, 2, 1, 3});
    double expect = std::numbers::sqrt3 / 4.0;
    double M = 3.0, L = 1.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const int a = seq[n];
        L *= 2 * a + 1;
        expect += M * a * std::numbers::sqrt3 / 4.0 / (L * L);
        M *= 3 * a + 1;
        const Polyline p = snowflake(seq, n);
        EXPECT_EQ(p.vertices.size(), static_cast<std::size_t>(M));
        EXPECT_TRUE(p.closed);
        EXPECT_NEAR(area(p), expect, 1e-12);
        EXPECT_LT(signed_area(p), 0.0);  // clockwise base
    }
}

TEST(Generator, ClassicKochArea) {
    // sqrt3/4 (1 + sum_k 3 4^{k-1} / 9^k)
    double s = 1.0;
    for (int k = 1; k <= 5; ++k) s += 3.0 * std::pow(4.0, k - 1) / std::pow(9.0, k);
    EXPECT_NEAR(area(snowflake(ScaleSequence::constant(1), 5)), std::numbers::sqrt3 / 4.0 * s, 1e-12);
}

TEST(Generator, Example33Rule) {
    const auto s = ScaleSequence::example33();
    // 1 exactly on 2^{2k}+1 .. 2^{2k+1}, k >= 1
    for (std::size_t n = 1; n <= 300; ++n) {
        bool inS = false;
        for (std::size_t k = 1; k < 6; ++k)
            if (n >= (1u << (2 * k)) + 1 && n <= (1u << (2 * k + 1))) inS = true;
        EXPECT_EQ(s[n], inS ? 1 : 2) << n;
    }
}

TEST(Generator, PeriodicExplicitAndIid) {
    const auto p = ScaleSequence::explicit_list({1, 3, 2});
    EXPECT_EQ(p[4], 1);
    EXPECT_EQ(p[6], 2);
    const auto a = ScaleSequence::iid({1, 2}, {0.5, 0.5}, 11);
    const auto b = ScaleSequence::iid({1, 2}, {0.5, 0.5}, 11);
    const auto c = ScaleSequence::iid({1, 2}, {0.5, 0.5}, 12);
    EXPECT_EQ(a.prefix(200), b.prefix(200));
    EXPECT_NE(a.prefix(200), c.prefix(200));
    const auto pre = a.prefix(200);
    std::set<int> seen(pre.begin(), pre.end());
    EXPECT_EQ(seen, (std::set<int>{1, 2}));
}

TEST(Generator, RejectsBadInput) {
    EXPECT_THROW(BlockParam::of(0), InvalidParameter);
    EXPECT_THROW(ScaleSequence::explicit_list({}), InvalidParameter);
    EXPECT_THROW(ScaleSequence::iid({1, 2}, {0.5, 0.6}, 1), InvalidParameter);
    EXPECT_THROW(snowflake(ScaleSequence::constant(3), 12), ResourceCap);
}
