#pragma once

#include <cstddef>

#include "apple/planner/global_planner.hpp"
#include "apple/world/types.hpp"

namespace apple::planner {

/// Index of the waypoint closest to the pose (first one on ties).
[[nodiscard]] std::size_t nearest_waypoint(const GlobalPath& path, const world::Pose& pose);

/// Length-weighted circular mean of the path tangent over the first
/// `distance` metres ahead of the nearest waypoint, in the robot frame.
[[nodiscard]] double local_goal(const GlobalPath& path, const world::Pose& pose,
                                double distance = 0.5);

/// Point at arc length `distance` ahead of the nearest waypoint (clamped to
/// the path end).
[[nodiscard]] Point lookahead_point(const GlobalPath& path, const world::Pose& pose, double distance);

}  // namespace apple::planner
