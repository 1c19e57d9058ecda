#pragma once

#include <cmath>
#include <numbers>

namespace apple::world {

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(a + std::numbers::pi, two_pi);
    if (r <= 0.0) r += two_pi;
    return r - std::numbers::pi;
}

struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Planar robot pose; heading is kept in (-pi, pi].
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Commanded linear (m/s) and angular (rad/s) velocity.
struct Twist {
    double v = 0.0;
    double w = 0.0;

    friend bool operator==(const Twist&, const Twist&) = default;
};

}  // namespace apple::world
