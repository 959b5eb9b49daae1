#include <gtest/gtest.h>

#include <cmath>

#include "snowheat/dimension.hpp"
#include "snowheat/error.hpp"

using namespace snowheat;

TEST(Dimension, ConstantSequenceRatio) {
    for (int a = 1; a <= 3; ++a)
        for (std::size_t n : {1u, 7u, 40u})
            EXPECT_NEAR(dim_ratio(ScaleSequence::constant(a), n), std::log(3.0 * a + 1) / std::log(2.0 * a + 1), 1e-12);
}

TEST(Dimension, PeriodicSequenceConverges) {
    // period (1, 2): dimension log(4 * 7) / log(3 * 5) along full periods
    const auto s = ScaleSequence::explicit_list({1, 2});
    EXPECT_NEAR(dim_ratio(s, 1000), std::log(28.0) / std::log(15.0), 1e-12);
    const DimEstimate e = liminf_limsup_dim(s, 4096);
    EXPECT_LE(e.lower, std::log(28.0) / std::log(15.0) + 1e-12);
    EXPECT_GE(e.upper, std::log(28.0) / std::log(15.0) - 1e-12);
}

TEST(Dimension, ErgodicFormula) {
    const double d = ergodic_dim({1, 2}, {0.5, 0.5});
    EXPECT_NEAR(d, (std::log(4.0) + std::log(7.0)) / (std::log(3.0) + std::log(5.0)), 1e-12);
    EXPECT_NEAR(ergodic_dim({2}, {1.0}), std::log(7.0) / std::log(5.0), 1e-12);
    EXPECT_THROW(ergodic_dim({1, 2}, {0.2, 0.2}), InvalidParameter);
}

TEST(Dimension, IidRatioApproachesErgodicValue) {
    const auto s = ScaleSequence::iid({1, 2}, {0.5, 0.5}, 5);
    EXPECT_NEAR(dim_ratio(s, 200000), ergodic_dim({1, 2}, {0.5, 0.5}), 2e-3);
}

TEST(Dimension, LocalSlopesOfPowerLaw) {
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(std::pow(10.0, -4.0 + 0.2 * i));
        y.push_back(3.0 * std::pow(x.back(), 0.7));
    }
    for (const auto& w : local_slopes(x, y, 3)) EXPECT_NEAR(w.value, 0.7, 1e-12);
    TubularProfile p;
    for (std::size_t i = 0; i < x.size(); ++i) p.entries.push_back({x[i], y[i], 0.0, 0.0, -1});
    const DimEstimate d = profile_dim(p);
    EXPECT_NEAR(d.estimate, 1.3, 1e-12);
    EXPECT_NEAR(d.lower, 1.3, 1e-12);
}

TEST(Dimension, ProfileNeedsTwoDecades) {
    TubularProfile p;
    for (int i = 0; i < 10; ++i) p.entries.push_back({0.01 * (1 + i), 0.1 * (1 + i), 0, 0, -1});
    EXPECT_THROW(profile_dim(p), InvalidParameter);
}

TEST(Dimension, Median) {
    EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
    EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
}

TEST(Dimension, LilEnvelope) {
    EXPECT_THROW(lil_envelope(10.0), DomainError);
    const double x = 1e6;
    EXPECT_NEAR(lil_envelope(x), std::sqrt(std::log(x) * std::log(std::log(std::log(x)))), 1e-12);
}

// Increments of the path are log m - gamma log l, which have mean zero at the ergodic gamma.
TEST(Dimension, LilPathHasZeroDrift) {
    const auto s = ScaleSequence::iid({1, 2}, {0.5, 0.5}, 9);
    const double g = ergodic_dim({1, 2}, {0.5, 0.5});
    const auto path = lil_path(s, 100000, g);
    EXPECT_LT(std::abs(path.back()) / 100000.0, 1e-3);
    const LilFit f = lil_fit(path);
    EXPECT_TRUE(std::isfinite(f.C));
    EXPECT_GT(f.C, 0.0);
}
