#include "apple/planner/dwa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "apple/planner/local_goal.hpp"
#include "apple/world/kinematics.hpp"

namespace apple::planner {

double collision_radius(const PlannerParams&, const DwaConfig& cfg) noexcept { return cfg.footprint_radius; }

double occupancy_cost(double clearance, const PlannerParams& p, const DwaConfig& cfg) noexcept {
    const double reach = cfg.footprint_radius + p.inflation_radius;
    return std::max(0.0, 1.0 / std::max(clearance, cfg.min_clearance) - 1.0 / reach);
}

std::vector<double> linear_samples(const PlannerParams& p) {
    const int s = std::max(p.vx_samples, 2);
    std::vector<double> v(static_cast<std::size_t>(s));
    for (int k = 0; k < s; ++k) v[static_cast<std::size_t>(k)] = p.max_vel_x * k / (s - 1);
    return v;
}

std::vector<double> angular_samples(const PlannerParams& p, const DwaConfig& cfg) {
    const int t = std::max(p.vtheta_samples, 2);
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(t) + 1);
    bool has_zero = false;
    for (int j = 0; j < t; ++j) {
        // Integer numerator keeps the middle sample exactly zero for odd t.
        const double val = p.max_vel_theta * (2 * j - (t - 1)) / (t - 1);
        has_zero = has_zero || val == 0.0;
        w.push_back(val);
    }
    if (cfg.sample_zero_w && !has_zero) w.push_back(0.0);
    return w;
}

namespace {

struct PathContext {
    const GlobalPath& path;
    Point goal_point;
};

double distance_to_path(const GlobalPath& path, double x, double y) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& wp : path.waypoints) {
        const double dx = wp.x - x;
        const double dy = wp.y - y;
        best = std::min(best, dx * dx + dy * dy);
    }
    return std::sqrt(best);
}

std::optional<double> score(const world::ClearanceField& scene, const world::Pose& pose,
                            const PathContext& ctx, const PlannerParams& params, const world::Twist& cmd,
                            const DwaConfig& cfg) {
    const int steps = std::max(1, static_cast<int>(std::lround(cfg.horizon / cfg.dt)));
    const double radius = collision_radius(params, cfg);
    world::Pose end = pose;
    for (int k = 1; k <= steps; ++k) {
        end = world::step_dynamics(pose, cmd, k * cfg.dt);
        if (scene.collides(end.x, end.y, radius)) return std::nullopt;
    }
    const double occ = occupancy_cost(scene.interpolate(end.x, end.y), params, cfg);
    // Path and goal distances are counted in grid cells.
    const double cells = 1.0 / scene.grid().resolution();
    const double path_dist = distance_to_path(ctx.path, end.x, end.y) * cells;
    const double goal_dist = std::hypot(ctx.goal_point.x - end.x, ctx.goal_point.y - end.y) * cells;
    return params.occdist_scale * occ + params.pdist_scale * path_dist + params.gdist_scale * goal_dist;
}

Point goal_point_for(const GlobalPath& path, const world::Pose& pose, const PlannerParams& params,
                     const DwaConfig& cfg) {
    const double lookahead = std::max(cfg.local_goal_distance, params.max_vel_x * cfg.horizon);
    return lookahead_point(path, pose, lookahead);
}

}  // namespace

std::optional<double> score_candidate(const world::ClearanceField& scene, const world::Pose& pose,
                                      const GlobalPath& path, const PlannerParams& params,
                                      const world::Twist& cmd, const DwaConfig& cfg) {
    if (path.empty()) throw InvalidArgument("dwa: empty global path");
    const PathContext ctx{path, goal_point_for(path, pose, params, cfg)};
    return score(scene, pose, ctx, params, cmd, cfg);
}

DwaChoice dwa_plan(const world::ClearanceField& scene, const world::Pose& pose, const GlobalPath& path,
                   const PlannerParams& params, const DwaConfig& cfg) {
    if (path.empty()) throw InvalidArgument("dwa: empty global path");
    const PathContext ctx{path, goal_point_for(path, pose, params, cfg)};
    const auto vs = linear_samples(params);
    const auto ws = angular_samples(params, cfg);

    std::optional<DwaChoice> best;
    auto preferred = [](const world::Twist& a, const world::Twist& b) {
        if (a.v != b.v) return a.v > b.v;
        if (std::abs(a.w) != std::abs(b.w)) return std::abs(a.w) < std::abs(b.w);
        return a.w > b.w;
    };
    for (double v : vs) {
        for (double w : ws) {
            const world::Twist cmd{v, w};
            const auto c = score(scene, pose, ctx, params, cmd, cfg);
            if (!c) continue;
            if (!best || *c < best->cost || (*c == best->cost && preferred(cmd, best->cmd)))
                best = DwaChoice{cmd, *c};
        }
    }
    if (!best) throw NoFeasibleMotion("dwa: every sampled rollout collides");
    return *best;
}

world::Twist recovery_twist(const PlannerParams& params, double local_goal_angle) noexcept {
    return {0.0, 0.5 * params.max_vel_theta * (local_goal_angle >= 0.0 ? 1.0 : -1.0)};
}

}  // namespace apple::planner
