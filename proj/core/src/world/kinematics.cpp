#include "apple/world/kinematics.hpp"

#include <cmath>

#include "apple/error.hpp"

namespace apple::world {

Pose step_dynamics(const Pose& pose, const Twist& cmd, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("step_dynamics: dt must be positive");
    const double h = pose.heading;
    if (std::abs(cmd.w) < 1e-9) {
        return {pose.x + cmd.v * dt * std::cos(h), pose.y + cmd.v * dt * std::sin(h),
                normalize_angle(h)};
    }
    const double r = cmd.v / cmd.w;
    const double h1 = h + cmd.w * dt;
    return {pose.x + r * (std::sin(h1) - std::sin(h)), pose.y - r * (std::cos(h1) - std::cos(h)),
            normalize_angle(h1)};
}

}  // namespace apple::world
