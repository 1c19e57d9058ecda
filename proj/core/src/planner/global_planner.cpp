#include "apple/planner/global_planner.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>

namespace apple::planner {

using world::Cell;

double GlobalPath::length() const noexcept {
    double len = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i)
        len += std::hypot(waypoints[i].x - waypoints[i - 1].x, waypoints[i].y - waypoints[i - 1].y);
    return len;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

using Entry = std::pair<double, std::size_t>;
using MinHeap = std::priority_queue<Entry, std::vector<Entry>, std::greater<>>;

}  // namespace

CostToGo::CostToGo(const world::ClearanceField& field, Cell goal, double footprint_radius)
    : grid_(field.grid()), goal_(goal), footprint_(footprint_radius) {
    const auto& grid = grid_;
    if (grid.occupied(goal)) throw NoPath("goal cell is occupied");
    const std::size_t n = grid.cells().size();
    traversable_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        traversable_[i] = field.at(grid.cell_at(i)) > footprint_radius ? 1 : 0;
    traversable_[grid.index(goal)] = 1;

    cost_.assign(n, kInf);
    const double res = grid.resolution();
    MinHeap heap;
    cost_[grid.index(goal)] = 0.0;
    heap.emplace(0.0, grid.index(goal));
    while (!heap.empty()) {
        const auto [d, i] = heap.top();
        heap.pop();
        if (d > cost_[i]) continue;
        const Cell c = grid.cell_at(i);
        for (int k = 0; k < 8; ++k) {
            const Cell nb{c.x + kDx[k], c.y + kDy[k]};
            if (!grid.in_bounds(nb)) continue;
            const std::size_t j = grid.index(nb);
            if (!traversable_[j]) continue;
            const double nd = d + (k < 4 ? res : res * std::sqrt(2.0));
            if (nd < cost_[j]) {
                cost_[j] = nd;
                heap.emplace(nd, j);
            }
        }
    }
}

bool CostToGo::reachable(Cell c) const noexcept {
    return grid_.in_bounds(c) && cost_[grid_.index(c)] < kInf;
}

double CostToGo::cost(Cell c) const noexcept {
    return grid_.in_bounds(c) ? cost_[grid_.index(c)] : kInf;
}

std::vector<Cell> CostToGo::descend(Cell from) const {
    const double res = grid_.resolution();
    std::vector<Cell> cells{from};
    Cell c = from;
    while (!(c == goal_)) {
        std::size_t best = 0;
        double best_cost = kInf;
        for (int k = 0; k < 8; ++k) {
            const Cell nb{c.x + kDx[k], c.y + kDy[k]};
            if (!reachable(nb)) continue;
            const double total = cost_[grid_.index(nb)] + (k < 4 ? res : res * std::sqrt(2.0));
            const std::size_t j = grid_.index(nb);
            // Equal totals (within rounding) go to the smaller cell index.
            if (total < best_cost - 1e-9 || (std::abs(total - best_cost) <= 1e-9 && j < best)) {
                best_cost = total;
                best = j;
            }
        }
        if (best_cost == kInf) throw NoPath("cost-to-go field has no downhill neighbour");
        c = grid_.cell_at(best);
        cells.push_back(c);
        if (cells.size() > grid_.cells().size()) throw NoPath("path extraction did not terminate");
    }
    return cells;
}

GlobalPath CostToGo::path_from(const world::Pose& from) const {
    const Cell start = grid_.cell_of(from.x, from.y);
    if (grid_.occupied(start)) throw NoPath("start cell is occupied");
    std::vector<Cell> cells;
    if (reachable(start)) {
        cells = descend(start);
    } else {
        // Escape: Dijkstra over free cells from the start until the cheapest
        // (escape + cost-to-go) entry into the traversable region is settled.
        const double res = grid_.resolution();
        const std::size_t n = grid_.cells().size();
        std::vector<double> dist(n, kInf);
        std::vector<std::size_t> parent(n, n);
        MinHeap heap;
        dist[grid_.index(start)] = 0.0;
        heap.emplace(0.0, grid_.index(start));
        double best_total = kInf;
        std::size_t best_entry = n;
        while (!heap.empty()) {
            const auto [d, i] = heap.top();
            heap.pop();
            if (d > dist[i]) continue;
            if (d >= best_total) break;
            const Cell c = grid_.cell_at(i);
            if (cost_[i] < kInf) {
                const double total = d + cost_[i];
                if (total < best_total || (total == best_total && i < best_entry)) {
                    best_total = total;
                    best_entry = i;
                }
                continue;
            }
            for (int k = 0; k < 8; ++k) {
                const Cell nb{c.x + kDx[k], c.y + kDy[k]};
                if (grid_.occupied(nb)) continue;
                const std::size_t j = grid_.index(nb);
                const double nd = d + (k < 4 ? res : res * std::sqrt(2.0));
                if (nd < dist[j]) {
                    dist[j] = nd;
                    parent[j] = i;
                    heap.emplace(nd, j);
                }
            }
        }
        if (best_entry == n) throw NoPath("goal unreachable from start");
        std::vector<Cell> prefix;
        for (std::size_t i = best_entry; i != n; i = parent[i]) prefix.push_back(grid_.cell_at(i));
        cells.assign(prefix.rbegin(), prefix.rend());
        const auto tail = descend(cells.back());
        cells.insert(cells.end(), tail.begin() + 1, tail.end());
    }
    GlobalPath path;
    path.waypoints.reserve(cells.size());
    const double res = grid_.resolution();
    for (const auto& c : cells) path.waypoints.push_back({(c.x + 0.5) * res, (c.y + 0.5) * res});
    return path;
}

GlobalPath plan_global(const world::OccupancyGrid& grid, const world::Pose& from, Cell goal,
                       double footprint_radius) {
    const world::ClearanceField field(grid);
    return CostToGo(field, goal, footprint_radius).path_from(from);
}

}  // namespace apple::planner
