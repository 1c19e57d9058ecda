#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "apple/gateway/episode.hpp"
#include "apple/gateway/human.hpp"
#include "apple/gateway/learner.hpp"
#include "apple/world/grid.hpp"

namespace apple::gateway {

struct ServeConfig {
    std::string host = "127.0.0.1";
    /// 0 picks a free port; see Service::port().
    std::uint16_t port = 8765;
    /// Simulated seconds per wall-clock second; 0 runs unpaced.
    double speed = 1.0;
    /// Episodes to run before shutting down; 0 runs until stop().
    std::int64_t episodes = 0;
    EpisodeConfig episode = default_human_episode();
    HumanFeedbackConfig human{};
    /// Outgoing frames buffered per client before the oldest is dropped.
    std::size_t client_queue = 64;
    std::size_t intake_queue = 256;
    std::size_t record_queue = 4096;
    /// dataset.log and policy.json are written here when set.
    std::filesystem::path out_dir;
    std::string session_id = "apple";
    std::uint64_t seed = 0;

    [[nodiscard]] static EpisodeConfig default_human_episode();
    void validate() const;
};

struct ServeStats {
    std::int64_t episodes = 0;
    std::int64_t frames_sent = 0;
    std::int64_t frames_dropped = 0;
    std::int64_t events_received = 0;
    std::int64_t events_rejected = 0;
    std::int64_t events_stale = 0;
    std::int64_t events_merged = 0;
    std::int64_t records = 0;
    std::int64_t negatives = 0;
    std::int64_t auto_positives = 0;
    std::int64_t train_steps = 0;
    std::int64_t clients = 0;
};

/// Live human-feedback session over a websocket. A simulation thread runs
/// episodes and streams state frames; a network thread accepts clients and
/// feedback frames; a trainer thread owns the learner and publishes policy
/// snapshots that the simulation swaps in between control ticks.
class Service {
public:
    Service(ServeConfig cfg, Learner learner, std::vector<world::OccupancyGrid> envs);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the socket and starts all threads.
    void start();
    /// Bound port (valid after start()).
    [[nodiscard]] std::uint16_t port() const noexcept;
    /// Blocks until the configured episodes finish (or stop() is called),
    /// then shuts down and writes outputs.
    void wait();
    void stop() noexcept;

    [[nodiscard]] ServeStats stats() const;
    /// The learner after wait() returns.
    [[nodiscard]] const Learner& learner() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace apple::gateway
