#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "apple/world/grid.hpp"

namespace apple::world {

/// Text grid format:
///   line 1  width
///   line 2  height
///   line 3  resolution
///   line 4  start sx sy goal gx gy
/// followed by `height` rows (row 0 = y 0) of `width` characters, '#' for
/// occupied and '.' for free.
void write_grid(std::ostream& os, const OccupancyGrid& grid);
[[nodiscard]] std::string to_text(const OccupancyGrid& grid);
[[nodiscard]] OccupancyGrid read_grid(std::istream& is);
[[nodiscard]] OccupancyGrid parse_grid(const std::string& text);

void save_grid(const std::filesystem::path& path, const OccupancyGrid& grid);
[[nodiscard]] OccupancyGrid load_grid(const std::filesystem::path& path);

}  // namespace apple::world
