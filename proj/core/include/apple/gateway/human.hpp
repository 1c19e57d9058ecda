#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "apple/gateway/episode.hpp"
#include "apple/learn/feedback.hpp"

namespace apple::gateway {

struct HumanFeedbackConfig {
    double rate_hz = 2.0;
    /// A window closing at time t labels the pair active at t - reaction_delay.
    double reaction_delay = 0.5;
    /// 2 = good/bad, 3 = good/neutral/bad. Level 0 is worst.
    int levels = 2;
    /// Events whose client timestamp is older than this many windows are dropped.
    int stale_windows = 2;

    void validate() const;
    [[nodiscard]] double window() const noexcept { return 1.0 / rate_hz; }
};

/// One button press from a client. client_ts is in episode time.
struct FeedbackEvent {
    std::string session_id;
    double client_ts = 0.0;
    int level = 0;
};

/// "bad" -> 0, "good" -> levels-1, "neutral" -> 1 (three levels only), or a
/// level index given as a decimal string.
[[nodiscard]] int parse_polarity(const std::string& polarity, int levels);

/// Turns sparse human button presses into one feedback record per window.
/// A window without any event yields an auto-positive record (top level);
/// several events inside one window collapse to the lowest level.
class FeedbackWindows {
public:
    enum class Intake { Accepted, Merged, Stale };

    explicit FeedbackWindows(HumanFeedbackConfig cfg);

    /// Forget all state for a new episode.
    void reset();
    void on_control(const ControlTick& tick);
    /// Registers an event that arrived at episode time `now`.
    Intake submit(const FeedbackEvent& ev, double now);
    /// Closes every window that ended at or before `now`.
    [[nodiscard]] std::vector<learn::FeedbackRecord> advance(double now);

    [[nodiscard]] const HumanFeedbackConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] std::int64_t stale() const noexcept { return stale_; }
    [[nodiscard]] std::int64_t merged() const noexcept { return merged_; }
    [[nodiscard]] std::int64_t negatives() const noexcept { return negatives_; }
    [[nodiscard]] std::int64_t auto_positives() const noexcept { return auto_positives_; }
    /// Windows that closed before any control tick could be labelled.
    [[nodiscard]] std::int64_t unaligned() const noexcept { return unaligned_; }

private:
    [[nodiscard]] std::int64_t window_of(double t) const noexcept;

    HumanFeedbackConfig cfg_;
    std::deque<ControlTick> history_;
    std::map<std::int64_t, int> pending_;
    std::int64_t next_window_ = 0;
    std::int64_t stale_ = 0;
    std::int64_t merged_ = 0;
    std::int64_t negatives_ = 0;
    std::int64_t auto_positives_ = 0;
    std::int64_t unaligned_ = 0;
};

}  // namespace apple::gateway
