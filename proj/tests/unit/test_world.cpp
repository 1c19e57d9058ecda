#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "apple/world/clearance.hpp"
#include "apple/world/environment.hpp"
#include "apple/world/grid_io.hpp"
#include "apple/world/kinematics.hpp"
#include "apple/world/lidar.hpp"
#include "support.hpp"

using namespace apple;
using namespace apple::world;

namespace {

bool border_walled(const OccupancyGrid& g) {
    for (int x = 0; x < g.width(); ++x)
        if (!g.occupied({x, 0}) || !g.occupied({x, g.height() - 1})) return false;
    for (int y = 0; y < g.height(); ++y)
        if (!g.occupied({0, y}) || !g.occupied({g.width() - 1, y})) return false;
    return true;
}

}  // namespace

TEST(Generate, ZeroFillLeavesOnlyWalls) {
    for (std::uint64_t seed : {1u, 9u, 123u}) {
        const auto g = generate_environment(seed, 0.0, 3, 30);
        EXPECT_TRUE(border_walled(g));
        for (int y = 1; y < g.height() - 1; ++y)
            for (int x = 1; x < g.width() - 1; ++x) EXPECT_FALSE(g.occupied({x, y}));
    }
}

TEST(Generate, FullFillFails) { EXPECT_THROW((void)generate_environment(5, 1.0, 3, 30), GenerationFailed); }

TEST(Generate, RejectsTinyArenas) { EXPECT_THROW((void)generate_environment(5, 0.1, 3, 9), InvalidArgument); }

TEST(Generate, GoldenHash) {
    const auto a = generate_environment(42, 0.15, 3, 60);
    const auto b = generate_environment(42, 0.15, 3, 60);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.hash(), 7573978468393029112ULL);
}

TEST(Generate, InvariantsOverSeeds) {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto g = generate_environment(derive_seed(3, i), 0.15, 3, 60);
        EXPECT_EQ(g.width(), 60);
        EXPECT_TRUE(border_walled(g));
        EXPECT_FALSE(g.occupied(g.start()));
        EXPECT_FALSE(g.occupied(g.goal()));
        EXPECT_TRUE(endpoints_connected(g));
    }
}

TEST(Generate, DifficultyOrdersDensity) {
    auto density = [](double p) {
        double occ = 0.0;
        for (std::uint64_t i = 0; i < 10; ++i) {
            const auto g = generate_environment(derive_seed(11, i), p, 3, 60);
            for (int y = 1; y < 59; ++y)
                for (int x = 1; x < 59; ++x) occ += g.occupied({x, y}) ? 1.0 : 0.0;
        }
        return occ;
    };
    EXPECT_LT(density(fill_prob_for(Difficulty::Easy)), density(fill_prob_for(Difficulty::Medium)));
    EXPECT_LT(density(fill_prob_for(Difficulty::Medium)), density(fill_prob_for(Difficulty::Hard)));
}

TEST(GridIo, RoundTrip) {
    const auto g = generate_environment(7, 0.15, 3, 40);
    const auto text = to_text(g);
    EXPECT_EQ(parse_grid(text), g);
    std::istringstream is(text);
    std::string w, h, r, se;
    std::getline(is, w);
    std::getline(is, h);
    std::getline(is, r);
    std::getline(is, se);
    EXPECT_EQ(w, "40");
    EXPECT_EQ(h, "40");
    EXPECT_EQ(se.rfind("start ", 0), 0u);
}

TEST(GridIo, RejectsMalformed) {
    EXPECT_THROW((void)parse_grid("3\n3\n0.1\nstart 1 1 goal 1 1\n###\n#.#\n"), FormatError);
    EXPECT_THROW((void)parse_grid("12\n10\n0.1\nstart 1 1 goal 2 2\n"), FormatError);
    EXPECT_THROW((void)load_grid("/nonexistent/grid.txt"), FileNotFound);
}

TEST(Raycast, OpenSpaceClipsToMaxRange) {
    const auto g = test::open_arena(80, 80);
    const auto scan = raycast(g, g.center_pose({40, 40}), 5.0);
    ASSERT_EQ(scan.ranges.size(), kScanBeams);
    for (double r : scan.ranges) EXPECT_DOUBLE_EQ(r, 5.0);
}

TEST(Raycast, WallAheadOnCentreBeam) {
    auto g = test::open_arena(60, 60);
    const auto pose0 = g.center_pose({10, 30});
    // Wall: every cell whose near edge lies at least 1 m ahead of the robot.
    const int wall_x = static_cast<int>(std::ceil((pose0.x + 1.0) / g.resolution()));
    for (int y = 1; y < 59; ++y)
        for (int x = wall_x; x < 59; ++x) g = g.with_cell({x, y}, true);
    Pose pose = pose0;
    const double offset = -kScanFov / 2.0 + 360.0 * kScanFov / 719.0;
    pose.heading = normalize_angle(-offset);
    const auto scan = raycast(g, pose, 5.0);
    EXPECT_NEAR(scan.ranges[360], 1.0, g.resolution());
}

TEST(Raycast, BeamGeometry) {
    Scan s;
    s.ranges.assign(kScanBeams, 1.0);
    EXPECT_DOUBLE_EQ(s.beam_angle(0, 0.0), -kScanFov / 2.0);
    EXPECT_NEAR(s.beam_angle(719, 0.0), kScanFov / 2.0, 1e-12);
}

TEST(Raycast, PoseInsideObstacleThrows) {
    const auto g = test::open_arena();
    EXPECT_THROW((void)raycast(g, g.center_pose({0, 5}), 5.0), PoseInsideObstacle);
}

TEST(Raycast, Soundness) {
    Rng rng(17);
    const double eps = 0.15 / 2.0;
    std::size_t hits = 0;
    for (int k = 0; k < 4; ++k) {
        const auto g = generate_environment(derive_seed(5, static_cast<std::uint64_t>(k)), 0.15, 3, 60);
        for (int p = 0; p < 10; ++p) {
            Pose pose;
            do {
                pose = {rng.uniform(0.2, 8.8), rng.uniform(0.2, 8.8), rng.uniform(-3.1, 3.1)};
            } while (g.pose_occupied(pose));
            const auto scan = raycast(g, pose, 5.0);
            for (std::size_t i = 0; i < kScanBeams; ++i) {
                const double r = scan.ranges[i];
                ASSERT_GT(r, 0.0);
                ASSERT_LE(r, 5.0);
                const double a = scan.beam_angle(i, pose.heading);
                const double before = std::max(0.0, r - eps);
                EXPECT_FALSE(g.pose_occupied({pose.x + before * std::cos(a), pose.y + before * std::sin(a), 0}));
                if (r < 5.0) {
                    // The hit cell itself is entered exactly at the range.
                    EXPECT_TRUE(g.pose_occupied({pose.x + (r + 1e-9) * std::cos(a), pose.y + (r + 1e-9) * std::sin(a), 0}));
                    ++hits;
                }
            }
        }
    }
    EXPECT_GT(hits, 0u);
}

TEST(Raycast, NoiseIsOptInAndDeterministic) {
    const auto g = generate_environment(8, 0.15, 3, 60);
    const auto pose = g.center_pose(g.start());
    Rng r1(3), r2(3);
    LidarConfig quiet;
    EXPECT_EQ(raycast(g, pose, quiet, r1).ranges, raycast(g, pose, 5.0).ranges);
    LidarConfig noisy{5.0, 0.05};
    Rng a(9), b(9);
    const auto s1 = raycast(g, pose, noisy, a);
    const auto s2 = raycast(g, pose, noisy, b);
    EXPECT_EQ(s1.ranges, s2.ranges);
    EXPECT_NE(s1.ranges, raycast(g, pose, 5.0).ranges);
    for (double r : s1.ranges) {
        EXPECT_GT(r, 0.0);
        EXPECT_LE(r, 5.0);
    }
    (void)r2;
}

TEST(Dynamics, Examples) {
    const auto a = step_dynamics({0, 0, 0}, {1, 0}, 1.0);
    EXPECT_NEAR(a.x, 1.0, 1e-12);
    EXPECT_NEAR(a.y, 0.0, 1e-12);
    EXPECT_NEAR(a.heading, 0.0, 1e-12);
    const auto b = step_dynamics({0, 0, 0}, {0, std::numbers::pi}, 1.0);
    EXPECT_NEAR(b.x, 0.0, 1e-12);
    EXPECT_NEAR(b.y, 0.0, 1e-12);
    EXPECT_NEAR(b.heading, std::numbers::pi, 1e-12);
    const auto c = step_dynamics({0, 0, 0}, {1, 1}, std::numbers::pi / 2);
    EXPECT_NEAR(c.x, 1.0, 1e-12);
    EXPECT_NEAR(c.y, 1.0, 1e-12);
    EXPECT_NEAR(c.heading, std::numbers::pi / 2, 1e-12);
}

TEST(Dynamics, ArcConvergesToStraightLine) {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const Pose p{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-3, 3)};
        const double v = rng.uniform(0, 2), dt = rng.uniform(0.01, 1.0);
        const auto s = step_dynamics(p, {v, 0.0}, dt);
        const auto a = step_dynamics(p, {v, 1e-6}, dt);
        EXPECT_NEAR(std::hypot(s.x - a.x, s.y - a.y), 0.0, 1e-6);
    }
}

TEST(Dynamics, HeadingStaysNormalised) {
    Rng rng(5);
    Pose p{0, 0, 0};
    for (int i = 0; i < 10000; ++i) {
        p = step_dynamics(p, {rng.uniform(-1, 2), rng.uniform(-3.14, 3.14)}, rng.uniform(0.01, 2.0));
        ASSERT_GT(p.heading, -std::numbers::pi);
        ASSERT_LE(p.heading, std::numbers::pi);
    }
    EXPECT_DOUBLE_EQ(normalize_angle(-std::numbers::pi), std::numbers::pi);
    EXPECT_DOUBLE_EQ(normalize_angle(std::numbers::pi), std::numbers::pi);
}

TEST(Collision, Examples) {
    const auto g = test::open_arena();
    EXPECT_FALSE(check_collision(g, g.center_pose({20, 20}), 0.21));
    // Occupied border cell (0, 20) has its centre at x = 0.075.
    const auto c = g.center_pose({0, 20});
    EXPECT_TRUE(check_collision(g, {c.x + 0.05, c.y, 0}, 0.105));
    EXPECT_FALSE(check_collision(g, {c.x + 0.105, c.y, 0}, 0.105));
}

TEST(Collision, FieldAgreesWithReference) {
    const auto g = generate_environment(21, 0.2, 3, 60);
    const ClearanceField f(g);
    Rng rng(6);
    for (int i = 0; i < 20000; ++i) {
        const double x = rng.uniform(0, 9), y = rng.uniform(0, 9), r = rng.uniform(0.05, 0.7);
        ASSERT_EQ(f.collides(x, y, r), check_collision(g, {x, y, 0}, r)) << x << ' ' << y << ' ' << r;
    }
}

TEST(Clearance, MatchesBruteForce) {
    const auto g = generate_environment(22, 0.2, 3, 30);
    const ClearanceField f(g);
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) {
            double best = 1e9;
            for (int yy = 0; yy < g.height(); ++yy)
                for (int xx = 0; xx < g.width(); ++xx)
                    if (g.occupied({xx, yy})) best = std::min(best, std::hypot(xx - x, yy - y) * g.resolution());
            ASSERT_NEAR(f.at({x, y}), best, 1e-9);
        }
}
