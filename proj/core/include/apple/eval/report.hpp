#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apple/error.hpp"
#include "apple/eval/stats.hpp"

namespace apple::evalx {

APPLE_DEFINE_ERROR(EnvMismatch);

/// Traversal times of one method, per environment. Failed runs carry the
/// timeout value and a flag.
struct MethodRuns {
    std::string name;
    std::vector<std::vector<double>> times;
    std::vector<std::vector<bool>> failed;

    void add(std::size_t env, double time, bool fail);
    [[nodiscard]] std::size_t env_count() const noexcept { return times.size(); }
    [[nodiscard]] std::size_t failures() const noexcept;
    [[nodiscard]] double mean_time() const;
    [[nodiscard]] double env_mean(std::size_t env) const;
};

struct PairCell {
    double better_pct = 0.0;  // share of envs where row is significantly faster
    double worse_pct = 0.0;   // share of envs where row is significantly slower
    int better = 0;
    int worse = 0;
    int flagged = 0;          // envs whose test hit a degenerate or separated case
};

struct PairwiseReport {
    double alpha = 0.05;
    std::vector<std::string> methods;
    std::size_t env_count = 0;
    /// cells[i][j]: method i compared against method j.
    std::vector<std::vector<PairCell>> cells;
    /// tests[i][j][e]: Welch test of method i vs method j on env e.
    std::vector<std::vector<std::vector<TTestResult>>> tests;
    std::vector<double> mean_time;
    std::vector<std::vector<double>> env_mean;
    std::vector<std::size_t> failures;
    std::vector<std::size_t> runs;

    [[nodiscard]] std::string to_markdown() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Per ordered pair, the percentage of environments where the row method is
/// significantly slower (worse) or faster (better) at level alpha.
/// Throws EnvMismatch when methods cover different environment sets.
[[nodiscard]] PairwiseReport pairwise_report(const std::vector<MethodRuns>& methods, double alpha = 0.05);

}  // namespace apple::evalx
