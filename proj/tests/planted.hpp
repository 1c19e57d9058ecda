#pragma once

#include <array>
#include <vector>

#include "apple/learn/discrete_policy.hpp"
#include "apple/learn/feedback.hpp"
#include "support.hpp"

namespace apple::test {

/// Two-cluster contextual bandit over a 7-entry library with 3 feedback
/// levels. In open states (long ranges) entry 1 earns the top level, in
/// cluttered states (short ranges) entry 3 does; every other pairing draws
/// level 0 or 1 uniformly.
struct PlantedBandit {
    static constexpr int kEntries = 7;
    static constexpr int kLevels = 3;
    static constexpr std::array<int, 2> kBest = {1, 3};

    static planner::RobotState state(Rng& rng, int cluster) {
        return cluster == 0 ? random_state(rng, 0.6, 1.0) : random_state(rng, 0.0, 0.4);
    }

    static std::vector<learn::FeedbackRecord> records(Rng& rng, std::size_t n) {
        std::vector<learn::FeedbackRecord> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int cluster = static_cast<int>(rng.below(2));
            learn::FeedbackRecord r;
            r.state = state(rng, cluster);
            r.library_index = static_cast<int>(rng.below(kEntries));
            r.level = r.library_index == kBest[static_cast<std::size_t>(cluster)] ? 2 : static_cast<int>(rng.below(2));
            r.timestamp = static_cast<std::int64_t>(i);
            out.push_back(std::move(r));
        }
        return out;
    }

    /// Cluster of a state, read back from its ranges.
    static int cluster_of(const planner::RobotState& s) { return s.scan.front() >= 0.5 ? 0 : 1; }

    /// Best entry per cluster by exhaustive per-(cluster, entry) mean level.
    static std::array<int, 2> empirical_best(const std::vector<learn::FeedbackRecord>& data) {
        std::array<std::array<double, kEntries>, 2> sum{}, count{};
        for (const auto& r : data) {
            const auto c = static_cast<std::size_t>(cluster_of(r.state));
            sum[c][static_cast<std::size_t>(r.library_index)] += r.level;
            count[c][static_cast<std::size_t>(r.library_index)] += 1.0;
        }
        std::array<int, 2> best{};
        for (std::size_t c = 0; c < 2; ++c) {
            std::vector<double> mean(kEntries);
            for (std::size_t k = 0; k < kEntries; ++k) mean[k] = count[c][k] > 0 ? sum[c][k] / count[c][k] : -1.0;
            best[c] = static_cast<int>(learn::argmax_first(mean));
        }
        return best;
    }

    /// Trains with minibatches drawn uniformly from `data`.
    static void train(learn::DiscretePolicy& policy, const std::vector<learn::FeedbackRecord>& data, int steps,
                      std::size_t batch, Rng& rng) {
        std::vector<const learn::FeedbackRecord*> b(batch);
        for (int s = 0; s < steps; ++s) {
            for (auto& p : b) p = &data[rng.below(data.size())];
            (void)policy.train_step(b);
        }
    }

    /// Fraction of fresh states where the greedy choice is the empirical best.
    static double greedy_accuracy(const learn::DiscretePolicy& policy, const std::array<int, 2>& best, Rng& rng,
                                  int n) {
        int hits = 0;
        for (int i = 0; i < n; ++i) {
            const int cluster = i % 2;
            const auto s = state(rng, cluster);
            if (static_cast<int>(policy.select(s, false, rng)) == best[static_cast<std::size_t>(cluster)]) ++hits;
        }
        return static_cast<double>(hits) / n;
    }
};

}  // namespace apple::test
