#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apple/error.hpp"
#include "apple/gateway/episode.hpp"
#include "apple/gateway/human.hpp"
#include "apple/world/grid.hpp"
#include "apple/world/lidar.hpp"

namespace apple::gateway {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kStreamRays = 90;

/// Rejected frame; `code` goes into the error frame.
class ProtocolError : public Error {
public:
    ProtocolError(std::string code, const std::string& detail) : Error(detail), code_(std::move(code)) {}
    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Every (beams / rays)-th beam starting at beam 0.
[[nodiscard]] std::vector<double> decimate_scan(const world::Scan& scan, std::size_t rays = kStreamRays);

struct SessionInfo {
    std::string session_id;
    int levels = 2;
    double feedback_hz = 2.0;
    double sim_hz = 10.0;
    double max_range = 5.0;
};

struct StateInfo {
    double t = 0.0;
    world::Pose pose;
    std::vector<double> scan;
    planner::PlannerParams theta;
    int theta_index = -1;
    std::int64_t episode_id = 0;
    /// running | success | collision | timeout
    std::string status = "running";
    double elapsed = 0.0;
};

[[nodiscard]] nlohmann::json hello_frame(const SessionInfo& s);
[[nodiscard]] nlohmann::json grid_frame(std::int64_t episode_id, const world::OccupancyGrid& grid);
[[nodiscard]] nlohmann::json state_frame(const StateInfo& s);
[[nodiscard]] nlohmann::json error_frame(const std::string& code, const std::string& detail);
[[nodiscard]] nlohmann::json ack_frame(double client_ts, const std::string& status);

/// Parses a client frame. Only "feedback" frames are accepted; throws
/// ProtocolError (bad_json, bad_type, missing_field, bad_value) otherwise.
[[nodiscard]] FeedbackEvent parse_feedback_frame(const std::string& text, int levels);

/// Schema check for any frame produced by this service; throws ProtocolError.
void validate_frame(const nlohmann::json& frame);

}  // namespace apple::gateway
