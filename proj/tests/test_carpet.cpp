#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "snowheat/carpet.hpp"
#include "snowheat/error.hpp"
#include "snowheat/simplicity.hpp"

using namespace snowheat;

TEST(Carpet, PatternAFormulas) {
    const CarpetDims d = carpet_dims(pattern_A());
    EXPECT_NEAR(d.hausdorff, std::log2(1.0 + std::sqrt(3.0)), 1e-12);
    EXPECT_NEAR(d.minkowski, 1.5, 1e-12);
}

// Full pattern fills the square: both dimensions 2. One row chosen per column
// in a 2 x 4 grid with equal row counts gives the classic 1 + log_n(total / m).
TEST(Carpet, FormulaSpecialCases) {
    const CarpetDims full = carpet_dims(Pattern::parse("1111;1111"));
    EXPECT_NEAR(full.hausdorff, 2.0, 1e-12);
    EXPECT_NEAR(full.minkowski, 2.0, 1e-12);
    const CarpetDims even = carpet_dims(Pattern::parse("0101;1010"));
    EXPECT_NEAR(even.hausdorff, 1.5, 1e-12);
    EXPECT_NEAR(even.minkowski, 1.5, 1e-12);
}

TEST(Carpet, ParseAndValidate) {
    const Pattern p = Pattern::parse("0111;1000");
    EXPECT_EQ(p.m, 2);
    EXPECT_EQ(p.n, 4);
    EXPECT_EQ(p.to_string(), "0111;1000");
    EXPECT_THROW(Pattern::parse("01;10;11"), InvalidParameter);
    EXPECT_THROW(Pattern::parse("0111"), InvalidParameter);
    EXPECT_THROW(Pattern::parse("0121;1000"), InvalidParameter);
    EXPECT_THROW(carpet_curve(Pattern::parse("1110;1001"), 2), InvalidParameter);
}

TEST(Carpet, CurveIsAGraph) {
    for (int k = 1; k <= 5; ++k) {
        const Polyline f = carpet_curve(pattern_A(), k);
        EXPECT_EQ(f.segment_count(), static_cast<std::size_t>(std::pow(4, k)));
        EXPECT_NEAR(f.vertices.front().x, 0.0, 1e-15);
        EXPECT_NEAR(f.vertices.back().x, 1.0, 1e-12);
        for (std::size_t i = 1; i < f.vertices.size(); ++i) EXPECT_GT(f.vertices[i].x, f.vertices[i - 1].x);
    }
}

// Refining keeps the level-k vertices: the level-(k+1) curve passes through them.
TEST(Carpet, CurvesAreNested) {
    const Polyline a = carpet_curve(pattern_A(), 3), b = carpet_curve(pattern_A(), 4);
    for (std::size_t i = 0; i < a.vertices.size(); ++i) {
        EXPECT_NEAR(a.vertices[i].x, b.vertices[4 * i].x, 1e-14);
        EXPECT_NEAR(a.vertices[i].y, b.vertices[4 * i].y, 1e-14);
    }
}

// The upper boundary is 1 + f on [0,1] and 3 - f(2 - t) on [1,2], so the
// f-integrals cancel and the area is 4 at every level.
TEST(Carpet, DomainIsSimpleWithExactArea) {
    for (int k = 1; k <= 4; ++k) {
        const Polyline d = carpet_domain(pattern_A(), k);
        EXPECT_TRUE(oracle::brute_simple(d));
        EXPECT_TRUE(simplicity_check(d));
        EXPECT_NEAR(area(d), 4.0, 1e-12);
        EXPECT_GT(signed_area(d), 0.0);
    }
}
