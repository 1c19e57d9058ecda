#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "apple/oracle/oracle.hpp"
#include "apple/rng.hpp"

using namespace apple;
using namespace apple::oracle;

TEST(Oracle, Examples) {
    EXPECT_DOUBLE_EQ(oracle_feedback(0.5, 0.0), 0.5);
    EXPECT_NEAR(oracle_feedback(1.0, std::numbers::pi / 2), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(oracle_feedback(2.0, std::numbers::pi), -2.0);
}

TEST(Oracle, BoundedBySpeed) {
    Rng rng(1);
    for (int i = 0; i < 1000000; ++i) {
        const double v = rng.uniform(-2.0, 2.0), g = rng.uniform(-10.0, 10.0);
        ASSERT_LE(std::abs(oracle_feedback(v, g)), std::abs(v));
    }
}

TEST(Oracle, Stateless) {
    Rng rng(2);
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 100; ++i) pairs.emplace_back(rng.uniform(0.0, 2.0), rng.uniform(-3.0, 3.0));
    std::vector<double> first;
    for (auto [v, g] : pairs) first.push_back(oracle_feedback(v, g));
    // Interleave unrelated calls before repeating the sequence in reverse.
    for (int i = 0; i < 1000; ++i) (void)oracle_feedback(rng.uniform(), rng.uniform());
    for (std::size_t i = pairs.size(); i-- > 0;) EXPECT_EQ(oracle_feedback(pairs[i].first, pairs[i].second), first[i]);
}

TEST(Discretize, Examples) {
    EXPECT_EQ(discretize(-0.1, {2, 1.0, 2.0}), 0);
    EXPECT_EQ(discretize(2.0, {2, 1.0, 2.0}), 1);
    EXPECT_EQ(discretize(-2.0, {2, 1.0, 2.0}), 0);
    // floor(2.7 / 4 * 3) = 2
    EXPECT_EQ(discretize(0.7, {3, 1.0, 2.0}), 2);
    EXPECT_EQ(discretize(0.0, {3, 1.0, 2.0}), 1);
    EXPECT_THROW((void)discretize(2.01, {3, 1.0, 2.0}), OutOfRange);
    EXPECT_THROW((void)discretize(0.0, {0, 1.0, 2.0}), InvalidArgument);
}

TEST(Discretize, MonotoneAndBinExact) {
    Rng rng(3);
    for (int L : {2, 3, 5, 7}) {
        const OracleConfig cfg{L, 1.0, 2.0};
        for (int i = 0; i < 100000; ++i) {
            double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
            if (a > b) std::swap(a, b);
            ASSERT_LE(discretize(a, cfg), discretize(b, cfg));
            const int expect = std::min(L - 1, static_cast<int>(std::floor((a + 2.0) / 4.0 * L)));
            ASSERT_EQ(discretize(a, cfg), expect);
        }
    }
}

TEST(Discretize, EpisodeVariantClamps) {
    Discretizer d({3, 1.0, 2.0});
    EXPECT_EQ(d(2.5), 2);
    EXPECT_EQ(d(-9.0), 0);
    EXPECT_EQ(d(0.0), 1);
    EXPECT_EQ(d.clamped_count(), 2u);
}

TEST(Config, Validate) {
    EXPECT_NO_THROW((OracleConfig{0, 1.0, 2.0}.validate()));
    EXPECT_THROW((OracleConfig{1, 1.0, 2.0}.validate()), InvalidArgument);
    EXPECT_THROW((OracleConfig{3, 0.0, 2.0}.validate()), InvalidArgument);
}
