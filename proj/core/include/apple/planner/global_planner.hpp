#pragma once

#include <cstdint>
#include <vector>

#include "apple/error.hpp"
#include "apple/world/clearance.hpp"

namespace apple::planner {

APPLE_DEFINE_ERROR(NoPath);

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Waypoints at cell centres, from the robot cell to the goal cell.
struct GlobalPath {
    std::vector<Point> waypoints;

    [[nodiscard]] bool empty() const noexcept { return waypoints.empty(); }
    [[nodiscard]] double length() const noexcept;
};

/// Dijkstra cost-to-go field towards one goal over cells whose clearance
/// exceeds the footprint radius (8-connected, Euclidean edge costs).
/// Computed once per (grid, goal); paths are then read off in O(length).
class CostToGo {
public:
    CostToGo(const world::ClearanceField& field, world::Cell goal, double footprint_radius);

    [[nodiscard]] bool reachable(world::Cell c) const noexcept;
    /// Metres to the goal along the optimal path; +inf when unreachable.
    [[nodiscard]] double cost(world::Cell c) const noexcept;
    /// Shortest path from the pose's cell. A start cell that is free but too
    /// close to obstacles is connected through free cells to the nearest
    /// traversable region. Throws NoPath.
    [[nodiscard]] GlobalPath path_from(const world::Pose& from) const;

    [[nodiscard]] world::Cell goal() const noexcept { return goal_; }

private:
    [[nodiscard]] std::vector<world::Cell> descend(world::Cell from) const;

    world::OccupancyGrid grid_;
    world::Cell goal_;
    double footprint_;
    std::vector<double> cost_;
    std::vector<std::uint8_t> traversable_;
};

/// One-shot global plan; builds the clearance field and cost-to-go itself.
[[nodiscard]] GlobalPath plan_global(const world::OccupancyGrid& grid, const world::Pose& from,
                                     world::Cell goal, double footprint_radius = 0.21);

}  // namespace apple::planner
