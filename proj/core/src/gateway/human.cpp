#include "apple/gateway/human.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>

namespace apple::gateway {

void HumanFeedbackConfig::validate() const {
    if (!(rate_hz > 0.0)) throw InvalidArgument("human feedback rate must be positive");
    if (reaction_delay < 0.0) throw InvalidArgument("reaction delay must be non-negative");
    if (levels < 2) throw InvalidArgument("human feedback needs at least two levels");
    if (stale_windows < 1) throw InvalidArgument("stale_windows must be at least 1");
}

int parse_polarity(const std::string& polarity, int levels) {
    if (polarity == "bad") return 0;
    if (polarity == "good") return levels - 1;
    if (polarity == "neutral") {
        if (levels != 3) throw InvalidArgument("'neutral' needs three feedback levels");
        return 1;
    }
    if (!polarity.empty() && std::all_of(polarity.begin(), polarity.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
        polarity.size() < 6) {
        const int v = std::stoi(polarity);
        if (v < levels) return v;
    }
    throw InvalidArgument("invalid polarity '" + polarity + "' for " + std::to_string(levels) + " levels");
}

FeedbackWindows::FeedbackWindows(HumanFeedbackConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void FeedbackWindows::reset() {
    history_.clear();
    pending_.clear();
    next_window_ = 0;
}

std::int64_t FeedbackWindows::window_of(double t) const noexcept {
    return static_cast<std::int64_t>(std::floor(t * cfg_.rate_hz + 1e-9));
}

void FeedbackWindows::on_control(const ControlTick& tick) {
    history_.push_back(tick);
    // Keep only what a future window could still need.
    const double keep_from = tick.time - cfg_.reaction_delay - 2.0 * cfg_.window();
    while (history_.size() > 1 && history_[1].time <= keep_from) history_.pop_front();
}

FeedbackWindows::Intake FeedbackWindows::submit(const FeedbackEvent& ev, double now) {
    if (ev.level < 0 || ev.level >= cfg_.levels) throw InvalidArgument("feedback level out of range");
    if (now - ev.client_ts > cfg_.stale_windows * cfg_.window() + 1e-9) {
        ++stale_;
        return Intake::Stale;
    }
    const auto w = std::max(window_of(now), next_window_);
    auto [it, inserted] = pending_.try_emplace(w, ev.level);
    if (inserted) return Intake::Accepted;
    it->second = std::min(it->second, ev.level);
    ++merged_;
    return Intake::Merged;
}

std::vector<learn::FeedbackRecord> FeedbackWindows::advance(double now) {
    std::vector<learn::FeedbackRecord> out;
    while (static_cast<double>(next_window_ + 1) * cfg_.window() <= now + 1e-9) {
        const auto w = next_window_++;
        const double close = static_cast<double>(w + 1) * cfg_.window();
        const double label_time = close - cfg_.reaction_delay;
        const auto pend = pending_.find(w);
        const int level = pend != pending_.end() ? pend->second : cfg_.levels - 1;
        const bool explicit_event = pend != pending_.end();
        if (explicit_event) pending_.erase(pend);

        const ControlTick* tick = nullptr;
        for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
            if (it->time <= label_time + 1e-9) {
                tick = &*it;
                break;
            }
        }
        if (tick == nullptr) {
            ++unaligned_;
            continue;
        }
        learn::FeedbackRecord rec;
        rec.state = tick->state;
        set_action(rec, tick->choice);
        rec.level = level;
        rec.timestamp = w;
        rec.source = explicit_event ? learn::FeedbackSource::Human : learn::FeedbackSource::AutoPositive;
        if (explicit_event) {
            if (level < cfg_.levels - 1) ++negatives_;
        } else {
            ++auto_positives_;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace apple::gateway
