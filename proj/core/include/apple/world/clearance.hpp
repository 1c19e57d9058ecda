#pragma once

#include <vector>

#include "apple/world/grid.hpp"

namespace apple::world {

/// True iff any occupied cell centre lies strictly within `radius` of (x, y).
/// Reference implementation; scans the cells inside the radius.
[[nodiscard]] bool check_collision(const OccupancyGrid& grid, const Pose& pose,
                                   double footprint_radius);

/// Exact Euclidean distance from every cell centre to the nearest occupied
/// cell centre (zero on occupied cells). One field serves every inflation
/// radius: inflation is a threshold applied at query time.
class ClearanceField {
public:
    ClearanceField() = default;
    explicit ClearanceField(const OccupancyGrid& grid);

    [[nodiscard]] const OccupancyGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] double at(Cell c) const noexcept;
    /// Bilinear interpolation of the centre distances at a world point.
    [[nodiscard]] double interpolate(double x, double y) const noexcept;

    /// Same answer as check_collision(), using the field to skip the exact
    /// scan whenever the cell-centre distance bounds settle the question.
    [[nodiscard]] bool collides(double x, double y, double radius) const noexcept;

private:
    OccupancyGrid grid_;
    std::vector<double> dist_;
};

}  // namespace apple::world
