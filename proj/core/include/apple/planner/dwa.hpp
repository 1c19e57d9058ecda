#pragma once

#include <optional>
#include <vector>

#include "apple/error.hpp"
#include "apple/planner/global_planner.hpp"
#include "apple/planner/params.hpp"
#include "apple/world/clearance.hpp"

namespace apple::planner {

APPLE_DEFINE_ERROR(NoFeasibleMotion);

struct DwaConfig {
    double horizon = 1.0;  // s
    double dt = 0.1;       // s
    double footprint_radius = 0.21;
    /// Floor applied to the end-of-rollout clearance in the occupancy term.
    double min_clearance = 0.01;
    /// Lower bound on the goal-point lookahead along the global path.
    double local_goal_distance = 0.5;
    /// Always add w = 0 to the angular samples (even t has no zero sample).
    bool sample_zero_w = true;
};

struct DwaChoice {
    world::Twist cmd;
    double cost = 0.0;
};

/// Radius within which an obstacle centre invalidates a rollout point (the
/// robot footprint; inflation only shapes the occupancy cost).
[[nodiscard]] double collision_radius(const PlannerParams& p, const DwaConfig& cfg) noexcept;

/// Occupancy term: 1/c - 1/(footprint + inflation) inside the inflated band,
/// zero beyond it; c is floored at min_clearance.
[[nodiscard]] double occupancy_cost(double clearance, const PlannerParams& p, const DwaConfig& cfg) noexcept;

/// Velocity samples: s values over [0, max_vel_x] and t values over
/// [-max_vel_theta, max_vel_theta], endpoints inclusive.
[[nodiscard]] std::vector<double> linear_samples(const PlannerParams& p);
[[nodiscard]] std::vector<double> angular_samples(const PlannerParams& p, const DwaConfig& cfg);

/// Rollout cost of one candidate, or nullopt when a rollout point comes
/// within collision_radius of an obstacle.
///   cost = o * occupancy_cost(clearance_end) + p * path_dist + g * goal_dist
/// with path_dist and goal_dist measured in grid cells.
[[nodiscard]] std::optional<double> score_candidate(const world::ClearanceField& scene,
                                                    const world::Pose& pose, const GlobalPath& path,
                                                    const PlannerParams& params, const world::Twist& cmd,
                                                    const DwaConfig& cfg = {});

/// Minimum-cost collision-free sample; ties prefer higher v, then smaller |w|.
/// Throws NoFeasibleMotion when every sample collides.
[[nodiscard]] DwaChoice dwa_plan(const world::ClearanceField& scene, const world::Pose& pose,
                                 const GlobalPath& path, const PlannerParams& params,
                                 const DwaConfig& cfg = {});

/// In-place rotation toward the local goal at half the angular limit.
[[nodiscard]] world::Twist recovery_twist(const PlannerParams& params, double local_goal_angle) noexcept;

}  // namespace apple::planner
