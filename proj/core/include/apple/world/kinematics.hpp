#pragma once

#include "apple/world/types.hpp"

namespace apple::world {

/// Exact unicycle integration of a constant twist over dt seconds.
[[nodiscard]] Pose step_dynamics(const Pose& pose, const Twist& cmd, double dt);

}  // namespace apple::world
