#include "apple/world/grid_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "apple/error.hpp"

namespace apple::world {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_grid(std::ostream& os, const OccupancyGrid& grid) {
    os << grid.width() << '\n'
       << grid.height() << '\n'
       << format_double(grid.resolution()) << '\n'
       << "start " << grid.start().x << ' ' << grid.start().y << " goal " << grid.goal().x << ' '
       << grid.goal().y << '\n';
    std::string row(static_cast<std::size_t>(grid.width()), '.');
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) row[static_cast<std::size_t>(x)] = grid.occupied({x, y}) ? '#' : '.';
        os << row << '\n';
    }
}

std::string to_text(const OccupancyGrid& grid) {
    std::ostringstream os;
    write_grid(os, grid);
    return os.str();
}

OccupancyGrid read_grid(std::istream& is) {
    int width = 0;
    int height = 0;
    std::string res_text;
    std::string kw_start, kw_goal;
    Cell start{}, goal{};
    if (!(is >> width >> height >> res_text))
        throw FormatError("grid: malformed header (width/height/resolution)");
    double resolution = 0.0;
    {
        const auto r = std::from_chars(res_text.data(), res_text.data() + res_text.size(), resolution);
        if (r.ec != std::errc{} || r.ptr != res_text.data() + res_text.size())
            throw FormatError("grid: bad resolution '" + res_text + "'");
    }
    if (!(is >> kw_start >> start.x >> start.y >> kw_goal >> goal.x >> goal.y) || kw_start != "start" ||
        kw_goal != "goal")
        throw FormatError("grid: malformed 'start sx sy goal gx gy' line");
    if (width < 10 || height < 10) throw FormatError("grid: dimensions below 10x10");
    std::vector<std::uint8_t> cells;
    cells.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    std::string row;
    for (int y = 0; y < height; ++y) {
        if (!(is >> row) || static_cast<int>(row.size()) != width)
            throw FormatError("grid: row " + std::to_string(y) + " has wrong length");
        for (char ch : row) {
            if (ch != '#' && ch != '.') throw FormatError(std::string("grid: unexpected character '") + ch + "'");
            cells.push_back(ch == '#' ? 1 : 0);
        }
    }
    try {
        return {width, height, resolution, std::move(cells), start, goal};
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("grid: ") + e.what());
    }
}

OccupancyGrid parse_grid(const std::string& text) {
    std::istringstream is(text);
    return read_grid(is);
}

void save_grid(const std::filesystem::path& path, const OccupancyGrid& grid) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write grid file " + path.string());
    write_grid(os, grid);
}

OccupancyGrid load_grid(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FileNotFound("grid file not found: " + path.string());
    return read_grid(is);
}

}  // namespace apple::world
