#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "snowheat/generator.hpp"
#include "snowheat/geometry.hpp"
#include "snowheat/raster.hpp"
#include "snowheat/simplicity.hpp"

using namespace snowheat;

namespace {

Polyline square() { return {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true}; }

}  // namespace

TEST(Geometry, AreaAndOrientation) {
    EXPECT_DOUBLE_EQ(signed_area(square()), 1.0);
    EXPECT_DOUBLE_EQ(signed_area(reversed(square())), -1.0);
    EXPECT_DOUBLE_EQ(perimeter(square()), 4.0);
    const Polyline t = transformed(square(), 2.0, {1.0, -1.0});
    EXPECT_DOUBLE_EQ(area(t), 4.0);
    EXPECT_DOUBLE_EQ(bounding_box(t).lo.x, 1.0);
}

TEST(Geometry, NearestMatchesBruteForce) {
    const Polyline p = snowflake(ScaleSequence::explicit_list({1, 2}), 3);
    const PolygonIndex idx(p);
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(-0.4, 1.4);
    for (int k = 0; k < 2000; ++k) {
        const Vec2 q{u(g), u(g)};
        EXPECT_NEAR(idx.distance(q), oracle::brute_distance(p, q), 1e-12);
        EXPECT_EQ(idx.inside(q), point_in_polygon(p, q));
    }
}

TEST(Geometry, ContentHashIsStable) {
    const Polyline a = snowflake(ScaleSequence::constant(1), 2);
    Polyline b = a;
    EXPECT_EQ(content_hash(a), content_hash(b));
    b.vertices[3].x += 1e-12;
    EXPECT_NE(content_hash(a), content_hash(b));
}

TEST(Simplicity, AgreesWithBruteForce) {
    for (auto seq : {ScaleSequence::constant(1), ScaleSequence::constant(2), ScaleSequence::explicit_list({1, 3, 2})})
        for (std::size_t n = 0; n <= 3; ++n) {
            const Polyline p = snowflake(seq, n);
            EXPECT_TRUE(oracle::brute_simple(p));
            EXPECT_TRUE(simplicity_check(p));
        }
    const Polyline bowtie{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}, true};
    EXPECT_FALSE(oracle::brute_simple(bowtie));
    EXPECT_FALSE(simplicity_check(bowtie));
    const Polyline touching{{{0, 0}, {2, 0}, {2, 2}, {1, 0}, {0, 2}}, true};
    EXPECT_FALSE(oracle::brute_simple(touching));
    EXPECT_FALSE(simplicity_check(touching));
}

TEST(Simplicity, RandomPolygonsAgree) {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 300; ++k) {
        Polyline p;
        p.closed = true;
        for (int i = 0; i < 7; ++i) p.vertices.push_back({u(g), u(g)});
        EXPECT_EQ(simplicity_check(p), oracle::brute_simple(p)) << "case " << k;
    }
}

TEST(Raster, CoverageAreaMatchesShoelace) {
    for (std::size_t n = 0; n <= 3; ++n) {
        const Polyline p = snowflake(ScaleSequence::constant(1), n);
        const Grid g = grid_covering(bounding_box(p), 0.013, 2);
        EXPECT_NEAR(Coverage(p, g).area(), area(p), 1e-9);
    }
    const Polyline tri{{{0.1, 0.2}, {0.93, 0.31}, {0.4, 0.87}}, true};
    EXPECT_NEAR(Coverage(tri, grid_covering(bounding_box(tri), 0.07, 2)).area(), area(tri), 1e-12);
}

TEST(Raster, CellRangeAlgebra) {
    const std::vector<CellRange> a{{0, 5}, {10, 12}}, b{{3, 11}};
    const auto c = intersect(a, b);
    EXPECT_EQ(total_cells(c), 3 + 2);
}
