#include "apple/world/clearance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace apple::world {

bool check_collision(const OccupancyGrid& grid, const Pose& pose, double footprint_radius) {
    if (!(footprint_radius > 0.0)) throw InvalidArgument("footprint radius must be positive");
    const double res = grid.resolution();
    const double r = footprint_radius;
    const int x0 = std::max(0, static_cast<int>(std::floor((pose.x - r) / res - 0.5)));
    const int x1 = std::min(grid.width() - 1, static_cast<int>(std::ceil((pose.x + r) / res - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor((pose.y - r) / res - 0.5)));
    const int y1 = std::min(grid.height() - 1, static_cast<int>(std::ceil((pose.y + r) / res - 0.5)));
    const double r2 = r * r;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (!grid.occupied({x, y})) continue;
            const double dx = (x + 0.5) * res - pose.x;
            const double dy = (y + 0.5) * res - pose.y;
            if (dx * dx + dy * dy < r2) return true;
        }
    }
    return false;
}

namespace {

// 1-D squared distance transform of a sampled function (lower envelope of
// parabolas, Felzenszwalb & Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    constexpr double inf = std::numeric_limits<double>::infinity();
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == inf) continue;
        double s = -inf;
        while (k >= 0) {
            const int p = v[k];
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p));
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        if (k < 0) s = -inf;
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    if (k < 0) {
        std::fill(d.begin(), d.end(), inf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const int p = v[j];
        d[q] = (q - p) * (q - p) + f[p];
    }
}

}  // namespace

ClearanceField::ClearanceField(const OccupancyGrid& grid) : grid_(grid) {
    const int w = grid.width();
    const int h = grid.height();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> sq(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = grid.cells()[i] ? 0.0 : inf;

    const int n = std::max(w, h);
    std::vector<double> f, d;
    std::vector<int> v(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) + 1);

    f.resize(static_cast<std::size_t>(h));
    d.resize(static_cast<std::size_t>(h));
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = sq[grid.index({x, y})];
        edt_1d(f, d, v, z);
        for (int y = 0; y < h; ++y) sq[grid.index({x, y})] = d[static_cast<std::size_t>(y)];
    }
    f.resize(static_cast<std::size_t>(w));
    d.resize(static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[static_cast<std::size_t>(x)] = sq[grid.index({x, y})];
        edt_1d(f, d, v, z);
        for (int x = 0; x < w; ++x) sq[grid.index({x, y})] = d[static_cast<std::size_t>(x)];
    }
    dist_.resize(sq.size());
    const double res = grid.resolution();
    for (std::size_t i = 0; i < sq.size(); ++i)
        dist_[i] = sq[i] == inf ? std::numeric_limits<double>::max() : std::sqrt(sq[i]) * res;
}

double ClearanceField::at(Cell c) const noexcept {
    if (!grid_.in_bounds(c)) return 0.0;
    return dist_[grid_.index(c)];
}

double ClearanceField::interpolate(double x, double y) const noexcept {
    const double res = grid_.resolution();
    const double gx = x / res - 0.5;
    const double gy = y / res - 0.5;
    const int x0 = static_cast<int>(std::floor(gx));
    const int y0 = static_cast<int>(std::floor(gy));
    const double fx = gx - x0;
    const double fy = gy - y0;
    const double d00 = at({x0, y0});
    const double d10 = at({x0 + 1, y0});
    const double d01 = at({x0, y0 + 1});
    const double d11 = at({x0 + 1, y0 + 1});
    return (1 - fx) * (1 - fy) * d00 + fx * (1 - fy) * d10 + (1 - fx) * fy * d01 + fx * fy * d11;
}

bool ClearanceField::collides(double x, double y, double radius) const noexcept {
    const Cell c = grid_.cell_of(x, y);
    if (!grid_.in_bounds(c)) return true;
    const double res = grid_.resolution();
    const double ox = x - (c.x + 0.5) * res;
    const double oy = y - (c.y + 0.5) * res;
    const double off = std::sqrt(ox * ox + oy * oy);
    const double d = dist_[grid_.index(c)];
    // |dist(p) - dist(centre)| <= |p - centre| (triangle inequality).
    constexpr double slack = 1e-9;
    if (d - off >= radius + slack) return false;
    if (d + off < radius - slack) return true;
    return check_collision(grid_, {x, y, 0.0}, radius);
}

}  // namespace apple::world
