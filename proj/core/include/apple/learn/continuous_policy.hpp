#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "apple/learn/box_space.hpp"
#include "apple/learn/discrete_policy.hpp"
#include "apple/learn/feedback.hpp"
#include "apple/nn/adam.hpp"
#include "apple/nn/mlp.hpp"

namespace apple::learn {

/// Scalar feedback model over (state, theta) used by the actor update.
/// Batched: one column per sample; theta is in physical (decoded) units.
class FeedbackModel {
public:
    virtual ~FeedbackModel() = default;
    /// Returns predictions; when dtheta is non-null fills d prediction / d theta.
    [[nodiscard]] virtual nn::Vector evaluate(const nn::Matrix& states, const nn::Matrix& thetas,
                                              nn::Matrix* dtheta) const = 0;
};

/// MLP critic over [state; encode(theta)].
class MlpCritic final : public FeedbackModel {
public:
    MlpCritic(const nn::Mlp& net, const BoxSpace& space) : net_(net), space_(space) {}
    [[nodiscard]] nn::Vector evaluate(const nn::Matrix& states, const nn::Matrix& thetas,
                                      nn::Matrix* dtheta) const override;

private:
    const nn::Mlp& net_;
    const BoxSpace& space_;
};

struct ContinuousPolicyConfig {
    BoxSpace space = BoxSpace::from_bounds(planner::ParamBounds::table());
    int state_dims = 721;
    std::vector<int> hidden = {128, 128};
    nn::AdamConfig actor_adam{};
    nn::AdamConfig critic_adam{};
    nn::AdamConfig alpha_adam{};
    double init_log_alpha = 0.0;
    /// Defaults to -dim(space).
    std::optional<double> target_entropy;
    double log_std_min = -20.0;
    double log_std_max = 2.0;
    /// Feedback levels; 0 = continuous. Leveled feedback is regressed as
    /// the level index.
    int levels = 0;
    double auto_positive_weight = 1.0;
};

struct ActionSample {
    std::vector<double> z;         // squashed action in [-1, 1]
    std::vector<double> theta;     // decoded, unrounded
    std::vector<double> executed;  // rounded and clamped
    double log_prob = 0.0;
};

/// Squashed-Gaussian actor, scalar critic and auto-tuned temperature.
class ContinuousPolicy {
public:
    ContinuousPolicy(ContinuousPolicyConfig cfg, std::uint64_t seed);

    [[nodiscard]] const ContinuousPolicyConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const BoxSpace& space() const noexcept { return cfg_.space; }
    [[nodiscard]] std::size_t dim() const noexcept { return cfg_.space.dim(); }
    [[nodiscard]] double target_entropy() const noexcept { return target_entropy_; }
    [[nodiscard]] double alpha() const noexcept;
    [[nodiscard]] double log_alpha() const noexcept { return log_alpha_; }
    void set_log_alpha(double v) noexcept { log_alpha_ = v; }

    [[nodiscard]] nn::Mlp& actor() noexcept { return actor_; }
    [[nodiscard]] const nn::Mlp& actor() const noexcept { return actor_; }
    [[nodiscard]] nn::Mlp& critic() noexcept { return critic_; }
    [[nodiscard]] const nn::Mlp& critic() const noexcept { return critic_; }
    [[nodiscard]] MlpCritic critic_model() const { return MlpCritic(critic_, cfg_.space); }

    /// Per-dim mean and (clamped) log-std for a state.
    [[nodiscard]] std::pair<std::vector<double>, std::vector<double>> distribution(
        const planner::RobotState& state) const;

    /// theta ~ pi(.|x) (or the mean action when deterministic) with the
    /// squashed-Gaussian log density
    ///   sum_d [log N(u_d; mu_d, sigma_d) - log(1 - tanh(u_d)^2 + 1e-6)].
    [[nodiscard]] ActionSample sample(const planner::RobotState& state, bool deterministic, Rng& rng) const;

    /// Critic MSE step against the records' feedback; returns the loss.
    double train_critic(std::span<const FeedbackRecord* const> batch);
    /// Reparameterised actor step on mean(-F(x, theta~) + alpha log pi);
    /// the critic is held fixed. Returns the loss.
    double train_actor(std::span<const planner::RobotState* const> states, Rng& rng);
    double train_actor(std::span<const planner::RobotState* const> states, const FeedbackModel& model, Rng& rng);
    /// One Adam step on log_alpha with loss mean(-alpha (log pi + H_target))
    /// over fresh samples; returns the new alpha.
    double update_temperature(std::span<const planner::RobotState* const> states, Rng& rng);
    double update_temperature_from_log_probs(std::span<const double> log_probs);

    [[nodiscard]] std::int64_t train_steps() const noexcept { return actor_adam_.step_count; }
    [[nodiscard]] std::int64_t critic_steps() const noexcept { return critic_adam_.step_count; }

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] static ContinuousPolicy from_json(const nlohmann::json& j);

private:
    [[nodiscard]] nn::Matrix stack_states(std::span<const planner::RobotState* const> states) const;

    ContinuousPolicyConfig cfg_;
    double target_entropy_ = 0.0;
    nn::Mlp actor_;
    nn::Mlp critic_;
    nn::AdamState actor_adam_;
    nn::AdamState critic_adam_;
    double log_alpha_ = 0.0;
    nn::ScalarAdam alpha_adam_;
};

/// Shared with tests: log density of the squashed Gaussian at pre-squash u.
[[nodiscard]] double squashed_log_prob(double u, double mean, double log_std) noexcept;

}  // namespace apple::learn
