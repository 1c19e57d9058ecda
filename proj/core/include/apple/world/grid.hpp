#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "apple/error.hpp"
#include "apple/world/types.hpp"

namespace apple::world {

/// Boolean occupancy grid with a start and a goal cell.
///
/// Cell (x, y) covers [x*res, (x+1)*res) x [y*res, (y+1)*res) in world
/// metres; storage is row-major with y as the row index.
class OccupancyGrid {
public:
    OccupancyGrid() = default;
    OccupancyGrid(int width, int height, double resolution, std::vector<std::uint8_t> cells,
                  Cell start, Cell goal);

    /// All interior cells free, border cells occupied.
    static OccupancyGrid walled(int width, int height, double resolution, Cell start, Cell goal);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] double resolution() const noexcept { return resolution_; }
    [[nodiscard]] Cell start() const noexcept { return start_; }
    [[nodiscard]] Cell goal() const noexcept { return goal_; }
    [[nodiscard]] std::span<const std::uint8_t> cells() const noexcept { return cells_; }

    [[nodiscard]] bool in_bounds(Cell c) const noexcept {
        return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
    }
    [[nodiscard]] std::size_t index(Cell c) const noexcept {
        return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(c.x);
    }
    [[nodiscard]] Cell cell_at(std::size_t idx) const noexcept {
        return {static_cast<int>(idx % static_cast<std::size_t>(width_)),
                static_cast<int>(idx / static_cast<std::size_t>(width_))};
    }
    /// Out-of-bounds cells read as occupied.
    [[nodiscard]] bool occupied(Cell c) const noexcept {
        return !in_bounds(c) || cells_[index(c)] != 0;
    }
    [[nodiscard]] Cell cell_of(double x, double y) const noexcept;
    [[nodiscard]] Pose center_pose(Cell c, double heading = 0.0) const noexcept;
    [[nodiscard]] bool pose_occupied(const Pose& p) const noexcept {
        return occupied(cell_of(p.x, p.y));
    }

    /// Copy with one cell changed; used to build test scenes.
    [[nodiscard]] OccupancyGrid with_cell(Cell c, bool occ) const;
    [[nodiscard]] OccupancyGrid with_endpoints(Cell start, Cell goal) const;

    /// FNV-1a over dimensions, resolution bits, endpoints and cells.
    [[nodiscard]] std::uint64_t hash() const noexcept;

    friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.0;
    std::vector<std::uint8_t> cells_;
    Cell start_{};
    Cell goal_{};
};

}  // namespace apple::world
