#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apple/gateway/episode.hpp"
#include "apple/learn/continuous_policy.hpp"
#include "apple/learn/discrete_policy.hpp"
#include "apple/learn/feedback.hpp"
#include "apple/planner/params.hpp"

namespace apple::gateway {

enum class PolicyKind { Discrete, Continuous };

[[nodiscard]] const char* to_string(PolicyKind k) noexcept;
[[nodiscard]] PolicyKind parse_kind(const std::string& s);

struct LearnerConfig {
    PolicyKind kind = PolicyKind::Discrete;
    /// Feedback levels; 0 = continuous feedback.
    int levels = 3;
    std::vector<int> hidden = {128, 128};
    nn::AdamConfig adam{};
    double epsilon_start = 0.3;
    double epsilon_end = 0.02;
    std::int64_t epsilon_anneal_steps = 10000;
    int batch_size = 64;
    std::int64_t warmup = 500;
    std::size_t dataset_capacity = 100000;
    double auto_positive_weight = 1.0;
    double init_log_alpha = 0.0;
    std::optional<double> target_entropy;

    void validate() const;
};

/// A parameter policy together with its feedback dataset and the training
/// cadence: one optimisation step per control tick once warm.
class Learner {
public:
    Learner(LearnerConfig cfg, planner::LibraryFile library, std::uint64_t seed);

    [[nodiscard]] const LearnerConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] PolicyKind kind() const noexcept { return cfg_.kind; }
    [[nodiscard]] const planner::LibraryFile& library() const noexcept { return library_; }

    [[nodiscard]] learn::DiscretePolicy& discrete();
    [[nodiscard]] const learn::DiscretePolicy& discrete() const;
    [[nodiscard]] learn::ContinuousPolicy& continuous();
    [[nodiscard]] const learn::ContinuousPolicy& continuous() const;

    [[nodiscard]] learn::FeedbackDataset& dataset() noexcept { return dataset_; }
    [[nodiscard]] const learn::FeedbackDataset& dataset() const noexcept { return dataset_; }
    [[nodiscard]] Rng& rng() noexcept { return rng_; }

    /// Selector over this learner's live policy. Discrete: epsilon-greedy
    /// when exploring, greedy otherwise. Continuous: stochastic when
    /// exploring, mean action otherwise.
    [[nodiscard]] std::unique_ptr<ParamSelector> make_selector(bool explore) const;

    /// Appends a record, stamping it with the running feedback count.
    void add_feedback(learn::FeedbackRecord record);
    /// One training step when the dataset holds at least `warmup` records;
    /// always advances the exploration schedule. Returns whether it trained.
    bool on_control_tick();

    [[nodiscard]] std::int64_t train_steps() const noexcept { return train_steps_; }
    [[nodiscard]] std::int64_t feedback_count() const noexcept { return dataset_.appended(); }
    [[nodiscard]] double last_loss() const noexcept { return last_loss_; }

    /// Policy, library, config and sampler state (not the dataset itself).
    [[nodiscard]] nlohmann::json to_json() const;
    /// Restores everything but the dataset contents.
    [[nodiscard]] static Learner from_json(const nlohmann::json& j);

private:
    LearnerConfig cfg_;
    planner::LibraryFile library_;
    std::optional<learn::DiscretePolicy> discrete_;
    std::optional<learn::ContinuousPolicy> continuous_;
    learn::FeedbackDataset dataset_;
    Rng rng_;
    std::int64_t train_steps_ = 0;
    double last_loss_ = 0.0;
};

[[nodiscard]] nlohmann::json learner_config_to_json(const LearnerConfig& c);
[[nodiscard]] LearnerConfig learner_config_from_json(const nlohmann::json& j);

}  // namespace apple::gateway
