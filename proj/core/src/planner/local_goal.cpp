#include "apple/planner/local_goal.hpp"

#include <cmath>
#include <limits>

namespace apple::planner {

std::size_t nearest_waypoint(const GlobalPath& path, const world::Pose& pose) {
    if (path.empty()) throw InvalidArgument("nearest_waypoint: empty path");
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
        const double dx = path.waypoints[i].x - pose.x;
        const double dy = path.waypoints[i].y - pose.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

double local_goal(const GlobalPath& path, const world::Pose& pose, double distance) {
    const std::size_t first = nearest_waypoint(path, pose);
    const auto& wp = path.waypoints;
    if (first + 1 >= wp.size()) {
        const double dx = wp[first].x - pose.x;
        const double dy = wp[first].y - pose.y;
        if (dx == 0.0 && dy == 0.0) return 0.0;
        return world::normalize_angle(std::atan2(dy, dx) - pose.heading);
    }
    double sx = 0.0;
    double sy = 0.0;
    double travelled = 0.0;
    for (std::size_t i = first; i + 1 < wp.size() && travelled < distance; ++i) {
        const double dx = wp[i + 1].x - wp[i].x;
        const double dy = wp[i + 1].y - wp[i].y;
        const double len = std::hypot(dx, dy);
        if (len == 0.0) continue;
        const double used = std::min(len, distance - travelled);
        // Weight by the portion of the segment inside the window.
        sx += used * dx / len;
        sy += used * dy / len;
        travelled += used;
    }
    if (sx == 0.0 && sy == 0.0) return 0.0;
    return world::normalize_angle(std::atan2(sy, sx) - pose.heading);
}

Point lookahead_point(const GlobalPath& path, const world::Pose& pose, double distance) {
    const std::size_t first = nearest_waypoint(path, pose);
    const auto& wp = path.waypoints;
    double remaining = distance;
    for (std::size_t i = first; i + 1 < wp.size(); ++i) {
        const double dx = wp[i + 1].x - wp[i].x;
        const double dy = wp[i + 1].y - wp[i].y;
        const double len = std::hypot(dx, dy);
        if (len >= remaining && len > 0.0) {
            const double f = remaining / len;
            return {wp[i].x + f * dx, wp[i].y + f * dy};
        }
        remaining -= len;
    }
    return wp.back();
}

}  // namespace apple::planner
