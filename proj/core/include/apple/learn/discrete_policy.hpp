#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "apple/error.hpp"
#include "apple/learn/feedback.hpp"
#include "apple/nn/adam.hpp"
#include "apple/nn/mlp.hpp"

namespace apple::learn {

APPLE_DEFINE_ERROR(ModeMismatch);

struct EpsilonSchedule {
    double start = 0.3;
    double end = 0.02;
    /// Linear anneal length in control ticks (half the planned training).
    std::int64_t anneal_steps = 1;

    [[nodiscard]] double at(std::int64_t step) const noexcept;
};

struct DiscretePolicyConfig {
    int library_size = 7;
    /// Feedback levels L; 0 selects continuous (regressed) feedback.
    int levels = 3;
    int state_dims = 721;
    std::vector<int> hidden = {128, 128};
    nn::AdamConfig adam{};
    EpsilonSchedule epsilon{};
    /// Loss weight of auto-positive (absence-of-feedback) records.
    double auto_positive_weight = 1.0;
};

/// Feedback predictor with one head per library entry and the greedy /
/// epsilon-greedy selector on top of it.
///
/// With L levels each head owns L logits and its scalar prediction is the
/// expected level sum_l l * softmax_l. With continuous feedback each head
/// is a single regressed value.
class DiscretePolicy {
public:
    DiscretePolicy(DiscretePolicyConfig cfg, std::uint64_t seed);

    [[nodiscard]] const DiscretePolicyConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] std::size_t library_size() const noexcept { return static_cast<std::size_t>(cfg_.library_size); }
    [[nodiscard]] const nn::Mlp& network() const noexcept { return net_; }
    [[nodiscard]] nn::Mlp& network() noexcept { return net_; }
    [[nodiscard]] const nn::AdamState& optimizer() const noexcept { return adam_; }

    /// K predicted feedback values for a state.
    [[nodiscard]] std::vector<double> predict(const planner::RobotState& state) const;
    /// Raw network outputs (K*L logits, or K values).
    [[nodiscard]] nn::Vector raw_outputs(const planner::RobotState& state) const;

    /// One Adam step on the mean per-record loss; returns that loss.
    double train_step(std::span<const FeedbackRecord* const> batch);
    double train_step(const std::vector<FeedbackRecord>& batch);
    /// Loss and gradient without updating (used by tests and diagnostics).
    [[nodiscard]] std::pair<double, nn::Gradients> loss_and_gradients(
        std::span<const FeedbackRecord* const> batch) const;

    /// Greedy argmax (lowest index wins ties) or, when exploring, a uniform
    /// draw with probability epsilon().
    [[nodiscard]] std::size_t select(const planner::RobotState& state, bool explore, Rng& rng) const;

    [[nodiscard]] double epsilon() const noexcept { return cfg_.epsilon.at(schedule_step_); }
    [[nodiscard]] std::int64_t schedule_step() const noexcept { return schedule_step_; }
    void set_schedule_step(std::int64_t s) noexcept { schedule_step_ = s; }
    void advance_schedule() noexcept { ++schedule_step_; }
    [[nodiscard]] std::int64_t train_steps() const noexcept { return adam_.step_count; }

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] static DiscretePolicy from_json(const nlohmann::json& j);

private:
    DiscretePolicyConfig cfg_;
    nn::Mlp net_;
    nn::AdamState adam_;
    std::int64_t schedule_step_ = 0;
};

/// Index of the largest value; first index on ties.
[[nodiscard]] std::size_t argmax_first(std::span<const double> values);

}  // namespace apple::learn
