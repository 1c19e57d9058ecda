#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apple/planner/state.hpp"
#include "apple/rng.hpp"

namespace apple::learn {

enum class FeedbackSource { Oracle, Human, AutoPositive };

[[nodiscard]] const char* to_string(FeedbackSource s) noexcept;
[[nodiscard]] FeedbackSource parse_source(const std::string& s);

/// One supervised example (x_j, theta_j, e_j).
///
/// Discrete-library records set library_index; continuous-policy records set
/// params. Leveled feedback sets level; continuous feedback sets value.
struct FeedbackRecord {
    planner::RobotState state;
    int library_index = -1;
    std::vector<double> params;
    int level = -1;
    double value = 0.0;
    std::int64_t timestamp = 0;
    FeedbackSource source = FeedbackSource::Oracle;

    [[nodiscard]] bool has_level() const noexcept { return level >= 0; }
    [[nodiscard]] bool discrete_action() const noexcept { return library_index >= 0; }

    friend bool operator==(const FeedbackRecord&, const FeedbackRecord&) = default;
};

inline constexpr int kDatasetLogVersion = 1;

/// Line-delimited JSON log: one record per line with keys
///   v, t, source, index | params, level | value, goal, scan.
[[nodiscard]] std::string record_to_line(const FeedbackRecord& r);
[[nodiscard]] FeedbackRecord record_from_line(const std::string& line);
[[nodiscard]] std::vector<FeedbackRecord> load_log(const std::filesystem::path& path);

/// Append-only record store with oldest-first eviction beyond `capacity`.
/// When a log path is attached every append is also written to the log.
class FeedbackDataset {
public:
    explicit FeedbackDataset(std::size_t capacity = 100000);

    /// Attach a log file (appending; created if missing).
    void attach_log(const std::filesystem::path& path, bool truncate = false);
    void flush();

    std::size_t append(FeedbackRecord record);

    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
    /// Total appended since construction, including evicted records.
    [[nodiscard]] std::int64_t appended() const noexcept { return appended_; }
    void set_appended(std::int64_t n) noexcept { appended_ = n; }
    [[nodiscard]] const FeedbackRecord& operator[](std::size_t i) const { return records_[i]; }
    [[nodiscard]] auto begin() const noexcept { return records_.begin(); }
    [[nodiscard]] auto end() const noexcept { return records_.end(); }

    /// n records drawn uniformly with replacement (empty if the dataset is).
    [[nodiscard]] std::vector<const FeedbackRecord*> sample(std::size_t n, Rng& rng) const;

private:
    std::size_t capacity_;
    std::deque<FeedbackRecord> records_;
    std::int64_t appended_ = 0;
    std::unique_ptr<std::ofstream> log_;
};

}  // namespace apple::learn
