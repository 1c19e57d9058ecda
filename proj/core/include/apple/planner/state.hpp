#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "apple/world/lidar.hpp"

namespace apple::planner {

inline constexpr std::size_t kStateDims = world::kScanBeams + 1;

/// Observation fed to the parameter policy: the normalised scan and the
/// local-goal angle in the robot frame.
struct RobotState {
    std::vector<double> scan;  // kScanBeams values in [0, 1]
    double local_goal = 0.0;   // radians, (-pi, pi]

    /// scan followed by local_goal (kStateDims numbers).
    [[nodiscard]] std::vector<double> flatten() const;
    [[nodiscard]] static RobotState unflatten(std::span<const double> flat);
    [[nodiscard]] bool valid() const noexcept;

    friend bool operator==(const RobotState&, const RobotState&) = default;
};

[[nodiscard]] RobotState make_state(const world::Scan& scan, double local_goal);

}  // namespace apple::planner
