#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "apple/gateway/episode.hpp"
#include "apple/gateway/learner.hpp"
#include "apple/oracle/oracle.hpp"
#include "apple/world/grid.hpp"

namespace apple::gateway {

struct TrainConfig {
    LearnerConfig learner{};
    EpisodeConfig episode{};
    oracle::OracleConfig oracle{};
    /// Training stops once this many feedback records have been collected.
    std::int64_t feedback_budget = 20000;
    /// Checkpoint after every this many episodes (0: only at the end).
    std::int64_t checkpoint_every = 25;
    std::uint64_t seed = 0;
};

struct EpisodeSummary {
    std::int64_t index = 0;
    std::size_t env = 0;
    Outcome outcome = Outcome::Timeout;
    double traversal_time = 0.0;
    std::int64_t feedback = 0;
};

/// Oracle-mode training: cycles the environments, collects one feedback
/// record per control interval and trains online. With an output directory
/// it keeps `dataset.log` and `checkpoint.json` there and can resume.
class Trainer {
public:
    Trainer(TrainConfig cfg, std::vector<world::OccupancyGrid> envs, planner::LibraryFile library,
            std::filesystem::path out_dir = {});

    /// Continues an interrupted run from `out_dir/checkpoint.json`; the
    /// dataset is reloaded from the log. `budget` replaces the stored one
    /// when positive.
    [[nodiscard]] static Trainer resume(const std::filesystem::path& out_dir, std::vector<world::OccupancyGrid> envs,
                                        std::int64_t budget = 0);

    /// Runs until the feedback budget is met; returns per-episode summaries
    /// of this call.
    std::vector<EpisodeSummary> run(const std::function<void(const EpisodeSummary&)>& progress = {});
    /// Runs at most `n` episodes (stopping early at the budget).
    std::vector<EpisodeSummary> run_episodes(std::int64_t n,
                                             const std::function<void(const EpisodeSummary&)>& progress = {});

    void save_checkpoint() const;

    [[nodiscard]] const Learner& learner() const noexcept { return learner_; }
    [[nodiscard]] Learner& learner() noexcept { return learner_; }
    [[nodiscard]] const TrainConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] std::int64_t episodes_done() const noexcept { return episodes_; }
    [[nodiscard]] bool done() const noexcept { return learner_.feedback_count() >= cfg_.feedback_budget; }

    [[nodiscard]] std::filesystem::path checkpoint_path() const { return out_dir_ / "checkpoint.json"; }
    [[nodiscard]] std::filesystem::path dataset_path() const { return out_dir_ / "dataset.log"; }

private:
    Trainer(TrainConfig cfg, std::vector<world::OccupancyGrid> envs, Learner learner, std::filesystem::path out_dir,
            std::int64_t episodes);

    TrainConfig cfg_;
    std::vector<world::OccupancyGrid> envs_;
    Learner learner_;
    std::filesystem::path out_dir_;
    std::int64_t episodes_ = 0;
};

[[nodiscard]] nlohmann::json episode_config_to_json(const EpisodeConfig& c);
[[nodiscard]] EpisodeConfig episode_config_from_json(const nlohmann::json& j);

/// Learner snapshot stored by a training run, for evaluation and serving.
[[nodiscard]] Learner load_policy(const std::filesystem::path& checkpoint);

}  // namespace apple::gateway
