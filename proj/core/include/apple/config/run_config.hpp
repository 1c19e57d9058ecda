#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apple/error.hpp"
#include "apple/eval/evaluate.hpp"
#include "apple/gateway/human.hpp"
#include "apple/gateway/serve.hpp"
#include "apple/gateway/trainer.hpp"
#include "apple/world/environment.hpp"

namespace apple::config {

APPLE_DEFINE_ERROR(ConfigError);

/// Every tunable of a run. Precedence: command-line flag > config file >
/// the defaults below.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string out_dir;
    /// Parameter library file; empty uses the built-in table.
    std::string library;

    std::string difficulty = "medium";
    double fill_prob_easy = 0.10;
    double fill_prob_medium = 0.15;
    double fill_prob_hard = 0.20;
    world::CaConfig ca{};
    int envs = 10;

    gateway::EpisodeConfig episode{};
    oracle::OracleConfig oracle{};
    gateway::LearnerConfig learner{};
    std::int64_t feedback_budget = 20000;
    std::int64_t checkpoint_every = 25;

    int eval_runs = 20;
    double eval_heading_jitter = 0.2;
    double eval_lidar_noise = 0.01;
    int eval_threads = 0;
    double alpha = 0.05;

    gateway::HumanFeedbackConfig human{};
    double human_control_hz = 2.0;
    double human_explore_prob = 0.3;
    std::string serve_host = "127.0.0.1";
    std::uint16_t serve_port = 8765;
    double serve_speed = 1.0;
    std::int64_t serve_episodes = 0;
    std::size_t client_queue = 64;
    std::size_t intake_queue = 256;
    std::size_t record_queue = 4096;

    void validate() const;

    [[nodiscard]] world::CaConfig ca_config() const;
    [[nodiscard]] planner::LibraryFile load_library() const;
    [[nodiscard]] gateway::TrainConfig train_config() const;
    [[nodiscard]] evalx::EvalConfig eval_config() const;
    [[nodiscard]] gateway::ServeConfig serve_config() const;
};

/// One configurable key, addressed by its dotted path.
struct ConfigField {
    std::string key;
    std::string doc;
    std::function<nlohmann::json(const RunConfig&)> get;
    std::function<void(RunConfig&, const nlohmann::json&)> set;
};

[[nodiscard]] const std::vector<ConfigField>& config_fields();

/// Nested JSON with every key.
[[nodiscard]] nlohmann::json to_json(const RunConfig& c);
/// Applies the keys present in `j` on top of `base`; unknown keys and
/// mistyped values throw ConfigError.
[[nodiscard]] RunConfig apply_json(RunConfig base, const nlohmann::json& j);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
/// Sets one dotted key from text; the text is read as JSON, falling back to
/// a plain string.
void apply_override(RunConfig& c, const std::string& key, const std::string& value);

/// Environment set for a seed: environment i uses derive_seed(seed, i).
[[nodiscard]] std::vector<world::OccupancyGrid> generate_envs(const RunConfig& c, int n, std::uint64_t seed);

}  // namespace apple::config
