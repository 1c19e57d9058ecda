#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "apple/error.hpp"
#include "apple/rng.hpp"
#include "apple/world/grid.hpp"

namespace apple::world {

APPLE_DEFINE_ERROR(PoseInsideObstacle);

inline constexpr std::size_t kScanBeams = 720;
inline constexpr double kScanFov = 1.5 * std::numbers::pi;

struct LidarConfig {
    double max_range = 5.0;
    /// Gaussian range noise std in metres; 0 disables noise.
    double noise_std = 0.0;
};

/// Planar scan: beam i points at heading - fov/2 + i*fov/(beams-1).
struct Scan {
    std::vector<double> ranges;
    double fov = kScanFov;
    double max_range = 5.0;

    [[nodiscard]] double beam_angle(std::size_t i, double heading) const noexcept {
        return heading - fov / 2.0 + static_cast<double>(i) * fov / static_cast<double>(ranges.size() - 1);
    }
};

/// Range to the first occupied cell along a ray (grid DDA), clipped to
/// max_range. Also reports the occupied cell that stopped the ray.
struct RayHit {
    double range = 0.0;
    bool hit = false;
    Cell cell{};
};
[[nodiscard]] RayHit cast_ray(const OccupancyGrid& grid, double x, double y, double angle,
                              double max_range);

/// Noiseless 720-beam scan.
[[nodiscard]] Scan raycast(const OccupancyGrid& grid, const Pose& pose, double max_range);
/// Scan with optional range noise drawn from `rng` (when cfg.noise_std > 0).
[[nodiscard]] Scan raycast(const OccupancyGrid& grid, const Pose& pose, const LidarConfig& cfg,
                           Rng& rng);

}  // namespace apple::world
