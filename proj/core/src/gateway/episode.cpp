#include "apple/gateway/episode.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "apple/planner/global_planner.hpp"
#include "apple/planner/local_goal.hpp"
#include "apple/world/clearance.hpp"
#include "apple/world/kinematics.hpp"

namespace apple::gateway {

const char* to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::Success: return "success";
        case Outcome::Collision: return "collision";
        case Outcome::Timeout: return "timeout";
    }
    return "timeout";
}

const char* to_string(FeedbackMode m) noexcept { return m == FeedbackMode::Oracle ? "oracle" : "human"; }

FeedbackMode parse_mode(const std::string& s) {
    if (s == "oracle") return FeedbackMode::Oracle;
    if (s == "human") return FeedbackMode::Human;
    throw InvalidArgument("unknown feedback mode '" + s + "' (expected oracle or human)");
}

void EpisodeConfig::validate() const {
    if (!(sim_hz > 0.0) || !(control_hz > 0.0)) throw InvalidArgument("rates must be positive");
    if (control_hz > sim_hz) throw InvalidArgument("control_hz must not exceed sim_hz");
    if (!(timeout > 0.0)) throw InvalidArgument("timeout must be positive");
    if (!(goal_tolerance > 0.0)) throw InvalidArgument("goal tolerance must be positive");
    if (backup_speed < 0.0 || backup_heading_tolerance < 0.0) throw InvalidArgument("backup settings must be non-negative");
    if (random_explore_prob < 0.0 || random_explore_prob > 1.0)
        throw InvalidArgument("random_explore_prob must lie in [0, 1]");
    (void)control_period();
}

int EpisodeConfig::control_period() const {
    const double ratio = sim_hz / control_hz;
    const long r = std::lround(ratio);
    if (r < 1 || std::abs(ratio - static_cast<double>(r)) > 1e-9)
        throw InvalidArgument("sim_hz must be an integer multiple of control_hz");
    return static_cast<int>(r);
}

ParamChoice DiscreteSelector::choose(const planner::RobotState& state, Rng& rng) {
    const auto k = policy_.select(state, explore_, rng);
    return {library_.at(k), static_cast<int>(k), {}};
}

ParamChoice ContinuousSelector::choose(const planner::RobotState& state, Rng& rng) {
    const auto s = policy_.sample(state, deterministic_, rng);
    ParamChoice c;
    if (s.executed.size() != planner::kParamDims) throw InvalidArgument("continuous policy must act in the planner space");
    std::array<double, planner::kParamDims> a{};
    std::copy(s.executed.begin(), s.executed.end(), a.begin());
    c.params = planner::PlannerParams::from_array(a);
    c.raw = s.theta;
    return c;
}

ParamChoice RandomExploreSelector::choose(const planner::RobotState& state, Rng& rng) {
    if (library_.size() > 0 && rng.uniform() < prob_) {
        const auto k = rng.below(library_.size());
        return {library_.at(k), static_cast<int>(k), {}};
    }
    return inner_.choose(state, rng);
}

void set_action(learn::FeedbackRecord& rec, const ParamChoice& choice) {
    rec.library_index = choice.library_index;
    rec.params.clear();
    if (choice.library_index < 0) {
        const auto a = choice.params.to_array();
        rec.params = choice.raw.empty() ? std::vector<double>(a.begin(), a.end()) : choice.raw;
    }
}

namespace {

int feedback_period(const EpisodeConfig& cfg, const oracle::OracleConfig& ocfg) {
    const double ratio = cfg.sim_hz / ocfg.rate_hz;
    const long r = std::lround(ratio);
    if (r < 1 || std::abs(ratio - static_cast<double>(r)) > 1e-9)
        throw InvalidArgument("sim_hz must be an integer multiple of the feedback rate");
    return static_cast<int>(r);
}

}  // namespace

EpisodeResult run_episode(const world::OccupancyGrid& grid, ParamSelector& selector, const EpisodeConfig& cfg,
                          const oracle::OracleConfig& oracle_cfg, const EpisodeHooks& hooks) {
    cfg.validate();
    const int control_period = cfg.control_period();
    const bool oracle_mode = cfg.mode == FeedbackMode::Oracle;
    if (oracle_mode) oracle_cfg.validate();
    const int fb_period = oracle_mode ? feedback_period(cfg, oracle_cfg) : 0;
    oracle::Discretizer discretize(oracle_cfg.continuous() ? oracle::OracleConfig{2, oracle_cfg.rate_hz, oracle_cfg.e_max}
                                                           : oracle_cfg);

    EpisodeResult result;
    const double dt = 1.0 / cfg.sim_hz;
    const world::ClearanceField field(grid);
    const planner::CostToGo ctg(field, grid.goal(), cfg.dwa.footprint_radius);
    Rng rng(cfg.seed);

    world::Pose pose = grid.center_pose(grid.start());
    planner::GlobalPath path;
    try {
        path = ctg.path_from(pose);
    } catch (const planner::NoPath&) {
        result.no_path = true;
        result.outcome = Outcome::Timeout;
        result.traversal_time = cfg.timeout;
        result.trajectory.push_back(pose);
        return result;
    }
    pose.heading = planner::local_goal(path, pose, cfg.local_goal_distance);
    if (cfg.heading_jitter > 0.0)
        pose.heading = world::normalize_angle(pose.heading + rng.uniform(-cfg.heading_jitter, cfg.heading_jitter));
    result.trajectory.push_back(pose);

    const world::Pose goal_pose = grid.center_pose(grid.goal());
    const auto max_ticks = static_cast<std::int64_t>(std::ceil(cfg.timeout * cfg.sim_hz - 1e-9));
    ControlTick active;
    bool have_active = false;
    world::Scan scan;

    for (std::int64_t tick = 0; tick < max_ticks; ++tick) {
        const double t = static_cast<double>(tick) * dt;
        if (hooks.should_stop && hooks.should_stop()) break;

        const bool control_tick = tick % control_period == 0;
        bool path_ok = true;
        try {
            path = ctg.path_from(pose);
        } catch (const planner::NoPath&) {
            path_ok = false;
        }
        const double g = path_ok ? planner::local_goal(path, pose, cfg.local_goal_distance) : 0.0;
        if (control_tick || hooks.on_frame) scan = world::raycast(grid, pose, cfg.lidar, rng);
        if (control_tick) {
            if (hooks.before_control) hooks.before_control(t);
            active.step = tick / control_period;
            active.time = t;
            active.state = planner::make_state(scan, g);
            active.choice = selector.choose(active.state, rng);
            have_active = true;
            result.params_trace.push_back({active.step, active.choice.params, active.choice.library_index});
            if (hooks.on_control) hooks.on_control(active);
        }

        world::Twist cmd{0.0, 0.0};
        bool recovered = !path_ok;
        if (path_ok) {
            try {
                cmd = planner::dwa_plan(field, pose, path, active.choice.params, cfg.dwa).cmd;
                // Standing still scores the same for every w, so the tie rule
                // would freeze the robot; rotate toward the path instead.
                recovered = cmd.v == 0.0 && cmd.w == 0.0;
            } catch (const planner::NoFeasibleMotion&) {
                recovered = true;
            }
        }
        if (recovered) {
            cmd = planner::recovery_twist(active.choice.params, g);
            if (std::abs(g) <= cfg.backup_heading_tolerance && cfg.backup_speed > 0.0) {
                const world::Twist back{-cfg.backup_speed, 0.0};
                bool clear = true;
                for (double s = cfg.dwa.dt; s <= cfg.dwa.horizon + 1e-9 && clear; s += cfg.dwa.dt) {
                    const auto p = world::step_dynamics(pose, back, s);
                    clear = !field.collides(p.x, p.y, cfg.dwa.footprint_radius);
                }
                if (clear) cmd = back;
            }
            ++result.recovery_ticks;
        }

        if (hooks.on_frame) hooks.on_frame(SimFrame{t, pose, cmd, &scan, &active});

        if (oracle_mode && have_active && (tick + 1) % fb_period == 0) {
            const double e = oracle::oracle_feedback(cmd.v, g);
            learn::FeedbackRecord rec;
            rec.state = active.state;
            set_action(rec, active.choice);
            if (oracle_cfg.continuous()) {
                rec.value = std::clamp(e, -oracle_cfg.e_max, oracle_cfg.e_max);
            } else {
                rec.level = discretize(e);
            }
            rec.timestamp = tick + 1;
            rec.source = learn::FeedbackSource::Oracle;
            ++result.feedback_count;
            if (hooks.on_feedback) hooks.on_feedback(std::move(rec));
        }

        pose = world::step_dynamics(pose, cmd, dt);
        result.trajectory.push_back(pose);
        const double now = static_cast<double>(tick + 1) * dt;
        result.traversal_time = now;
        if (field.collides(pose.x, pose.y, cfg.dwa.footprint_radius)) {
            result.outcome = Outcome::Collision;
            result.feedback_clamped = discretize.clamped_count();
            return result;
        }
        if (std::hypot(pose.x - goal_pose.x, pose.y - goal_pose.y) <= cfg.goal_tolerance) {
            result.outcome = Outcome::Success;
            result.feedback_clamped = discretize.clamped_count();
            return result;
        }
    }
    result.outcome = Outcome::Timeout;
    result.traversal_time = std::min(result.traversal_time, cfg.timeout);
    result.feedback_clamped = discretize.clamped_count();
    return result;
}

}  // namespace apple::gateway
