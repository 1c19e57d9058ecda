#pragma once

#include <vector>

#include "apple/planner/state.hpp"
#include "apple/rng.hpp"
#include "apple/world/grid.hpp"

namespace apple::test {

/// Walled arena, start and goal on the middle row near opposite walls.
inline world::OccupancyGrid open_arena(int w = 40, int h = 40, double res = 0.15) {
    return world::OccupancyGrid::walled(w, h, res, {2, h / 2}, {w - 3, h / 2});
}

/// State with scan entries uniform in [lo, hi] and a uniform goal angle.
inline planner::RobotState random_state(Rng& rng, double lo = 0.0, double hi = 1.0) {
    planner::RobotState s;
    s.scan.resize(world::kScanBeams);
    for (auto& v : s.scan) v = rng.uniform(lo, hi);
    s.local_goal = rng.uniform(-3.0, 3.0);
    return s;
}

}  // namespace apple::test
