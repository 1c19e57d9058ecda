#pragma once

#include <cstdint>
#include <string>

#include "apple/error.hpp"
#include "apple/world/grid.hpp"

namespace apple::world {

APPLE_DEFINE_ERROR(GenerationFailed);

/// Cellular-automaton arena settings. Difficulty is driven by fill_prob
/// (0.10 easy, 0.15 medium, 0.20 hard).
struct CaConfig {
    double fill_prob = 0.15;
    int iterations = 3;
    int size = 60;
    double resolution = 0.15;
    /// Occupied cells with fewer occupied neighbours than this are cleared.
    int survive_min = 1;
    /// Start and goal must be at least this far from any obstacle centre.
    double endpoint_clearance = 0.55;
    /// Start and goal are searched for within this many cells of their border.
    int endpoint_band = 8;
    /// Cells whose clearance exceeds this are traversable (robot radius).
    double footprint_radius = 0.21;
    int max_retries = 256;
};

enum class Difficulty { Easy, Medium, Hard };

[[nodiscard]] double fill_prob_for(Difficulty d) noexcept;
[[nodiscard]] Difficulty parse_difficulty(const std::string& s);

/// Generates a walled CA arena with a reachable start (left band) and goal
/// (right band). Retries with seed+1, seed+2, ... up to cfg.max_retries.
[[nodiscard]] OccupancyGrid generate_environment(std::uint64_t seed, const CaConfig& cfg);

/// Convenience overload matching the positional contract.
[[nodiscard]] OccupancyGrid generate_environment(std::uint64_t seed, double fill_prob,
                                                 int iterations, int size);

/// Whether a 4-connected path of free cells joins start and goal.
[[nodiscard]] bool endpoints_connected(const OccupancyGrid& grid);

}  // namespace apple::world
