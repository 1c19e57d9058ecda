#include "apple/world/lidar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace apple::world {

RayHit cast_ray(const OccupancyGrid& grid, double x, double y, double angle, double max_range) {
    const double res = grid.resolution();
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    Cell c = grid.cell_of(x, y);
    if (grid.occupied(c)) return {0.0, true, c};

    constexpr double inf = std::numeric_limits<double>::infinity();
    const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    // Distance along the ray to the next vertical / horizontal cell boundary.
    double t_max_x = inf;
    double t_max_y = inf;
    double t_delta_x = inf;
    double t_delta_y = inf;
    if (step_x != 0) {
        const double boundary = (step_x > 0 ? c.x + 1 : c.x) * res;
        t_max_x = (boundary - x) / dx;
        t_delta_x = res / std::abs(dx);
    }
    if (step_y != 0) {
        const double boundary = (step_y > 0 ? c.y + 1 : c.y) * res;
        t_max_y = (boundary - y) / dy;
        t_delta_y = res / std::abs(dy);
    }
    while (true) {
        double t;
        if (t_max_x < t_max_y) {
            t = t_max_x;
            t_max_x += t_delta_x;
            c.x += step_x;
        } else {
            t = t_max_y;
            t_max_y += t_delta_y;
            c.y += step_y;
        }
        if (t >= max_range) return {max_range, false, c};
        if (grid.occupied(c)) return {std::max(t, 0.0), true, c};
    }
}

Scan raycast(const OccupancyGrid& grid, const Pose& pose, double max_range) {
    Rng unused(0);
    return raycast(grid, pose, LidarConfig{max_range, 0.0}, unused);
}

Scan raycast(const OccupancyGrid& grid, const Pose& pose, const LidarConfig& cfg, Rng& rng) {
    if (!(cfg.max_range > 0.0)) throw InvalidArgument("raycast: max_range must be positive");
    if (grid.pose_occupied(pose)) throw PoseInsideObstacle("raycast: pose lies in an occupied cell");
    constexpr double min_range = 1e-6;
    Scan scan;
    scan.max_range = cfg.max_range;
    scan.ranges.resize(kScanBeams);
    for (std::size_t i = 0; i < kScanBeams; ++i) {
        double r = cast_ray(grid, pose.x, pose.y, scan.beam_angle(i, pose.heading), cfg.max_range).range;
        if (cfg.noise_std > 0.0) r += rng.normal(0.0, cfg.noise_std);
        scan.ranges[i] = std::clamp(r, min_range, cfg.max_range);
    }
    return scan;
}

}  // namespace apple::world
