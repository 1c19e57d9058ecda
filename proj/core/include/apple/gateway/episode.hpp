#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apple/learn/continuous_policy.hpp"
#include "apple/learn/discrete_policy.hpp"
#include "apple/learn/feedback.hpp"
#include "apple/oracle/oracle.hpp"
#include "apple/planner/dwa.hpp"
#include "apple/planner/params.hpp"
#include "apple/world/grid.hpp"
#include "apple/world/lidar.hpp"

namespace apple::gateway {

enum class FeedbackMode { Oracle, Human };
enum class Outcome { Success, Collision, Timeout };

[[nodiscard]] const char* to_string(Outcome o) noexcept;
[[nodiscard]] const char* to_string(FeedbackMode m) noexcept;
[[nodiscard]] FeedbackMode parse_mode(const std::string& s);

struct EpisodeConfig {
    double control_hz = 1.0;
    double sim_hz = 10.0;
    double timeout = 100.0;
    double goal_tolerance = 0.3;
    FeedbackMode mode = FeedbackMode::Oracle;
    bool explore = false;
    double random_explore_prob = 0.3;
    planner::DwaConfig dwa{};
    world::LidarConfig lidar{};
    /// Local-goal lookahead along the global path for the policy state, m.
    double local_goal_distance = 0.5;
    /// Recovery: when no moving command is feasible and the robot already
    /// faces the path (|g| within this tolerance), reverse instead of rotating.
    double backup_heading_tolerance = 0.35;
    double backup_speed = 0.1;
    /// Uniform start-heading perturbation half-width, rad.
    double heading_jitter = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    /// Sim ticks per control tick.
    [[nodiscard]] int control_period() const;
};

/// The parameter set chosen at one control tick.
struct ParamChoice {
    planner::PlannerParams params;
    int library_index = -1;
    /// Unrounded continuous action (continuous policies only).
    std::vector<double> raw;
};

/// Maps a state to a parameter set at each control tick.
class ParamSelector {
public:
    virtual ~ParamSelector() = default;
    [[nodiscard]] virtual ParamChoice choose(const planner::RobotState& state, Rng& rng) = 0;
};

class FixedSelector final : public ParamSelector {
public:
    explicit FixedSelector(planner::PlannerParams p, int library_index = -1)
        : params_(p), index_(library_index) {}
    [[nodiscard]] ParamChoice choose(const planner::RobotState&, Rng&) override { return {params_, index_, {}}; }

private:
    planner::PlannerParams params_;
    int index_;
};

/// Greedy (or epsilon-greedy) library selection.
class DiscreteSelector final : public ParamSelector {
public:
    DiscreteSelector(const learn::DiscretePolicy& policy, const planner::ParameterLibrary& library, bool explore)
        : policy_(policy), library_(library), explore_(explore) {}
    [[nodiscard]] ParamChoice choose(const planner::RobotState& state, Rng& rng) override;

private:
    const learn::DiscretePolicy& policy_;
    const planner::ParameterLibrary& library_;
    bool explore_;
};

/// Stochastic or mean action of the continuous actor.
class ContinuousSelector final : public ParamSelector {
public:
    ContinuousSelector(const learn::ContinuousPolicy& policy, bool deterministic)
        : policy_(policy), deterministic_(deterministic) {}
    [[nodiscard]] ParamChoice choose(const planner::RobotState& state, Rng& rng) override;

private:
    const learn::ContinuousPolicy& policy_;
    bool deterministic_;
};

/// Uniform random library entry with probability `prob`, else the inner choice.
class RandomExploreSelector final : public ParamSelector {
public:
    RandomExploreSelector(ParamSelector& inner, const planner::ParameterLibrary& library, double prob)
        : inner_(inner), library_(library), prob_(prob) {}
    [[nodiscard]] ParamChoice choose(const planner::RobotState& state, Rng& rng) override;

private:
    ParamSelector& inner_;
    const planner::ParameterLibrary& library_;
    double prob_;
};

/// Copies the chosen parameters into a record: the library index, or the
/// raw continuous action when there is no index.
void set_action(learn::FeedbackRecord& rec, const ParamChoice& choice);

struct ControlTick {
    std::int64_t step = 0;  // control tick index within the episode
    double time = 0.0;
    planner::RobotState state;
    ParamChoice choice;
};

struct SimFrame {
    double time = 0.0;
    world::Pose pose;
    world::Twist cmd;
    const world::Scan* scan = nullptr;
    const ControlTick* active = nullptr;
};

struct EpisodeHooks {
    /// Called at each control tick before the selector runs (training).
    std::function<void(double time)> before_control;
    /// Called after a new parameter set takes effect.
    std::function<void(const ControlTick&)> on_control;
    /// Oracle feedback for the pair active during the interval just ended.
    std::function<void(learn::FeedbackRecord&&)> on_feedback;
    /// Every sim tick after the command is chosen.
    std::function<void(const SimFrame&)> on_frame;
    /// Polled every sim tick; true ends the episode early as a timeout.
    std::function<bool()> should_stop;
};

struct TraceEntry {
    std::int64_t step = 0;
    planner::PlannerParams params;
    int library_index = -1;
};

struct EpisodeResult {
    double traversal_time = 0.0;
    Outcome outcome = Outcome::Timeout;
    /// Set when no global path exists from the start.
    bool no_path = false;
    std::vector<world::Pose> trajectory;
    std::vector<TraceEntry> params_trace;
    std::int64_t feedback_count = 0;
    /// Sim ticks where every DWA sample collided and recovery rotation ran.
    std::int64_t recovery_ticks = 0;
    std::size_t feedback_clamped = 0;
};

/// Runs the planner on `grid` from its start to its goal. The policy is
/// queried at control ticks; DWA re-plans every sim tick with the active
/// parameters. In oracle mode each completed control interval yields one
/// feedback record (v cos g at its last sim tick) through hooks.on_feedback.
[[nodiscard]] EpisodeResult run_episode(const world::OccupancyGrid& grid, ParamSelector& selector,
                                        const EpisodeConfig& cfg, const oracle::OracleConfig& oracle_cfg = {},
                                        const EpisodeHooks& hooks = {});

}  // namespace apple::gateway
