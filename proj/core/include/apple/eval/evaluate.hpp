#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "apple/eval/report.hpp"
#include "apple/gateway/episode.hpp"
#include "apple/world/grid.hpp"

namespace apple::evalx {

struct EvalConfig {
    int runs = 20;
    gateway::EpisodeConfig episode{};
    std::uint64_t seed = 0;
    /// Worker threads over environments; 0 uses the hardware concurrency.
    int threads = 0;
};

/// Evaluation defaults: exploitation only, start-heading jitter of 0.2 rad
/// and 1 cm lidar noise so repeated runs differ.
[[nodiscard]] EvalConfig default_eval_config();

using SelectorFactory = std::function<std::unique_ptr<gateway::ParamSelector>()>;

struct RunRecord {
    std::size_t env = 0;
    int run = 0;
    gateway::Outcome outcome = gateway::Outcome::Timeout;
    double time = 0.0;
};

/// Runs `cfg.runs` episodes per environment. Run r in env e uses episode
/// seed derive_seed(cfg.seed, e * 1000 + r), shared across methods so they
/// face identical perturbations. Failures are scored at the timeout.
/// Environments run in parallel; results do not depend on the thread
/// count, and `make_selector` and `progress` may be called concurrently.
[[nodiscard]] MethodRuns evaluate(const std::string& name, const std::vector<world::OccupancyGrid>& envs,
                                  const SelectorFactory& make_selector, const EvalConfig& cfg,
                                  const std::function<void(const RunRecord&)>& progress = {});

}  // namespace apple::evalx
