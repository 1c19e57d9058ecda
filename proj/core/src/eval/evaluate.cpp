#include "apple/eval/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "apple/rng.hpp"

namespace apple::evalx {

EvalConfig default_eval_config() {
    EvalConfig c;
    c.episode.explore = false;
    c.episode.heading_jitter = 0.2;
    c.episode.lidar.noise_std = 0.01;
    return c;
}

MethodRuns evaluate(const std::string& name, const std::vector<world::OccupancyGrid>& envs,
                    const SelectorFactory& make_selector, const EvalConfig& cfg,
                    const std::function<void(const RunRecord&)>& progress) {
    if (cfg.runs < 2) throw InvalidArgument("evaluation needs at least two runs per environment");
    if (envs.empty()) throw InvalidArgument("evaluation needs at least one environment");
    cfg.episode.validate();
    if (cfg.threads < 0) throw InvalidArgument("evaluation thread count must be non-negative");

    std::vector<std::vector<RunRecord>> results(envs.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t e = next++; e < envs.size(); e = next++) {
            try {
                auto selector = make_selector();
                for (int r = 0; r < cfg.runs; ++r) {
                    auto ep = cfg.episode;
                    ep.seed = derive_seed(cfg.seed, e * 1000 + static_cast<std::uint64_t>(r));
                    const auto res = gateway::run_episode(envs[e], *selector, ep);
                    const bool fail = res.outcome != gateway::Outcome::Success;
                    const RunRecord rec{e, r, res.outcome, fail ? ep.timeout : res.traversal_time};
                    results[e].push_back(rec);
                    if (progress) {
                        std::lock_guard lock(mu);
                        progress(rec);
                    }
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                next = envs.size();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto n = std::min<std::size_t>(envs.size(), cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    MethodRuns out;
    out.name = name;
    for (const auto& env : results)
        for (const auto& rec : env) out.add(rec.env, rec.time, rec.outcome != gateway::Outcome::Success);
    return out;
}

}  // namespace apple::evalx
