#include "apple/world/environment.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "apple/rng.hpp"
#include "apple/world/clearance.hpp"

namespace apple::world {

double fill_prob_for(Difficulty d) noexcept {
    switch (d) {
        case Difficulty::Easy: return 0.10;
        case Difficulty::Medium: return 0.15;
        case Difficulty::Hard: return 0.20;
    }
    return 0.15;
}

Difficulty parse_difficulty(const std::string& s) {
    if (s == "easy") return Difficulty::Easy;
    if (s == "medium") return Difficulty::Medium;
    if (s == "hard") return Difficulty::Hard;
    throw InvalidArgument("unknown difficulty '" + s + "' (expected easy, medium or hard)");
}

namespace {

std::vector<std::uint8_t> automaton(std::uint64_t seed, const CaConfig& cfg) {
    const int n = cfg.size;
    Rng rng(seed);
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (auto& c : cells) c = rng.uniform() < cfg.fill_prob ? 1 : 0;

    auto at = [&](const std::vector<std::uint8_t>& g, int x, int y) -> int {
        if (x < 0 || y < 0 || x >= n || y >= n) return 1;
        return g[static_cast<std::size_t>(y * n + x)];
    };
    std::vector<std::uint8_t> next(cells.size());
    for (int it = 0; it < cfg.iterations; ++it) {
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                int count = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        if (dx != 0 || dy != 0) count += at(cells, x + dx, y + dy);
                const bool occ = at(cells, x, y) != 0;
                next[static_cast<std::size_t>(y * n + x)] =
                    (count >= 5 || (occ && count >= cfg.survive_min)) ? 1 : 0;
            }
        }
        cells.swap(next);
    }
    for (int i = 0; i < n; ++i) {
        cells[static_cast<std::size_t>(i)] = 1;
        cells[static_cast<std::size_t>((n - 1) * n + i)] = 1;
        cells[static_cast<std::size_t>(i * n)] = 1;
        cells[static_cast<std::size_t>(i * n + n - 1)] = 1;
    }
    return cells;
}

// Labels 8-connected components of traversable cells; returns per-cell label
// (-1 for non-traversable) and per-label sizes.
std::pair<std::vector<int>, std::vector<int>> components(const OccupancyGrid& grid,
                                                         const std::vector<std::uint8_t>& trav) {
    std::vector<int> label(trav.size(), -1);
    std::vector<int> sizes;
    std::queue<std::size_t> q;
    for (std::size_t i = 0; i < trav.size(); ++i) {
        if (!trav[i] || label[i] >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        sizes.push_back(0);
        label[i] = id;
        q.push(i);
        while (!q.empty()) {
            const Cell c = grid.cell_at(q.front());
            q.pop();
            ++sizes.back();
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const Cell nb{c.x + dx, c.y + dy};
                    if (!grid.in_bounds(nb)) continue;
                    const std::size_t j = grid.index(nb);
                    if (trav[j] && label[j] < 0) {
                        label[j] = id;
                        q.push(j);
                    }
                }
            }
        }
    }
    return {std::move(label), std::move(sizes)};
}

std::optional<OccupancyGrid> attempt(std::uint64_t seed, const CaConfig& cfg) {
    const int n = cfg.size;
    OccupancyGrid grid(n, n, cfg.resolution, automaton(seed, cfg), {0, 0}, {0, 0});
    const ClearanceField field(grid);
    std::vector<std::uint8_t> trav(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < trav.size(); ++i)
        trav[i] = field.at(grid.cell_at(i)) > cfg.footprint_radius ? 1 : 0;
    const auto [label, sizes] = components(grid, trav);

    const int mid = n / 2;
    auto endpoint_ok = [&](Cell c) {
        return trav[grid.index(c)] && field.at(c) >= cfg.endpoint_clearance;
    };
    // Prefer the largest component that touches both border bands.
    std::vector<int> order(sizes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sizes[a] > sizes[b]; });
    for (int comp : order) {
        std::optional<Cell> start;
        std::optional<Cell> goal;
        auto better = [&](Cell a, std::optional<Cell> b, bool left) {
            if (!b) return true;
            const int ka = left ? a.x : -a.x;
            const int kb = left ? b->x : -b->x;
            if (ka != kb) return ka < kb;
            const int da = std::abs(a.y - mid);
            const int db = std::abs(b->y - mid);
            if (da != db) return da < db;
            return a.y < b->y;
        };
        for (int y = 1; y < n - 1; ++y) {
            for (int x = 1; x < n - 1; ++x) {
                const Cell c{x, y};
                if (label[grid.index(c)] != comp || !endpoint_ok(c)) continue;
                if (x <= cfg.endpoint_band && better(c, start, true)) start = c;
                if (x >= n - 1 - cfg.endpoint_band && better(c, goal, false)) goal = c;
            }
        }
        if (start && goal) return grid.with_endpoints(*start, *goal);
    }
    return std::nullopt;
}

}  // namespace

OccupancyGrid generate_environment(std::uint64_t seed, const CaConfig& cfg) {
    if (cfg.size < 10) throw InvalidArgument("generate_environment: size must be >= 10");
    if (cfg.iterations < 0) throw InvalidArgument("generate_environment: iterations must be >= 0");
    if (cfg.fill_prob < 0.0 || cfg.fill_prob > 1.0)
        throw InvalidArgument("generate_environment: fill_prob must be in [0, 1]");
    for (int k = 0; k <= cfg.max_retries; ++k) {
        if (auto g = attempt(seed + static_cast<std::uint64_t>(k), cfg)) return *g;
    }
    throw GenerationFailed("no connected start/goal pair after " +
                           std::to_string(cfg.max_retries + 1) + " attempts (seed " +
                           std::to_string(seed) + ")");
}

OccupancyGrid generate_environment(std::uint64_t seed, double fill_prob, int iterations, int size) {
    CaConfig cfg;
    cfg.fill_prob = fill_prob;
    cfg.iterations = iterations;
    cfg.size = size;
    return generate_environment(seed, cfg);
}

bool endpoints_connected(const OccupancyGrid& grid) {
    if (grid.occupied(grid.start()) || grid.occupied(grid.goal())) return false;
    std::vector<std::uint8_t> seen(grid.cells().size(), 0);
    std::queue<Cell> q;
    q.push(grid.start());
    seen[grid.index(grid.start())] = 1;
    constexpr int dxs[4] = {1, -1, 0, 0};
    constexpr int dys[4] = {0, 0, 1, -1};
    while (!q.empty()) {
        const Cell c = q.front();
        q.pop();
        if (c == grid.goal()) return true;
        for (int k = 0; k < 4; ++k) {
            const Cell nb{c.x + dxs[k], c.y + dys[k]};
            if (grid.occupied(nb) || seen[grid.index(nb)]) continue;
            seen[grid.index(nb)] = 1;
            q.push(nb);
        }
    }
    return false;
}

}  // namespace apple::world
