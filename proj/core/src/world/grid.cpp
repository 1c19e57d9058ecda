#include "apple/world/grid.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace apple::world {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution,
                             std::vector<std::uint8_t> cells, Cell start, Cell goal)
    : width_(width), height_(height), resolution_(resolution), cells_(std::move(cells)),
      start_(start), goal_(goal) {
    if (width < 10 || height < 10) throw InvalidArgument("grid must be at least 10x10 cells");
    if (!(resolution > 0.0)) throw InvalidArgument("grid resolution must be positive");
    if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw InvalidArgument("grid cell count does not match width*height");
    for (auto& c : cells_) c = c != 0 ? 1 : 0;
    if (!in_bounds(start_) || !in_bounds(goal_))
        throw InvalidArgument("start/goal outside the grid");
}

OccupancyGrid OccupancyGrid::walled(int width, int height, double resolution, Cell start,
                                    Cell goal) {
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (x == 0 || y == 0 || x == width - 1 || y == height - 1)
                cells[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = 1;
        }
    }
    return {width, height, resolution, std::move(cells), start, goal};
}

Cell OccupancyGrid::cell_of(double x, double y) const noexcept {
    return {static_cast<int>(std::floor(x / resolution_)),
            static_cast<int>(std::floor(y / resolution_))};
}

Pose OccupancyGrid::center_pose(Cell c, double heading) const noexcept {
    return {(c.x + 0.5) * resolution_, (c.y + 0.5) * resolution_, normalize_angle(heading)};
}

OccupancyGrid OccupancyGrid::with_cell(Cell c, bool occ) const {
    OccupancyGrid g = *this;
    if (in_bounds(c)) g.cells_[index(c)] = occ ? 1 : 0;
    return g;
}

OccupancyGrid OccupancyGrid::with_endpoints(Cell start, Cell goal) const {
    if (!in_bounds(start) || !in_bounds(goal)) throw InvalidArgument("start/goal outside the grid");
    OccupancyGrid g = *this;
    g.start_ = start;
    g.goal_ = goal;
    return g;
}

namespace {

struct Fnv1a {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    void byte(std::uint8_t b) noexcept {
        h ^= b;
        h *= 0x100000001B3ULL;
    }
    void u64(std::uint64_t v) noexcept {
        for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
    }
};

}  // namespace

std::uint64_t OccupancyGrid::hash() const noexcept {
    Fnv1a f;
    f.u64(static_cast<std::uint64_t>(width_));
    f.u64(static_cast<std::uint64_t>(height_));
    f.u64(std::bit_cast<std::uint64_t>(resolution_));
    f.u64(static_cast<std::uint64_t>(start_.x));
    f.u64(static_cast<std::uint64_t>(start_.y));
    f.u64(static_cast<std::uint64_t>(goal_.x));
    f.u64(static_cast<std::uint64_t>(goal_.y));
    for (auto c : cells_) f.byte(c);
    return f.h;
}

}  // namespace apple::world
