#include "apple/planner/state.hpp"

#include <cmath>

namespace apple::planner {

std::vector<double> RobotState::flatten() const {
    std::vector<double> out;
    out.reserve(scan.size() + 1);
    out.insert(out.end(), scan.begin(), scan.end());
    out.push_back(local_goal);
    return out;
}

RobotState RobotState::unflatten(std::span<const double> flat) {
    if (flat.size() != kStateDims)
        throw InvalidArgument("RobotState: expected " + std::to_string(kStateDims) + " numbers, got " +
                              std::to_string(flat.size()));
    RobotState s;
    s.scan.assign(flat.begin(), flat.end() - 1);
    s.local_goal = flat.back();
    return s;
}

bool RobotState::valid() const noexcept {
    if (scan.size() != world::kScanBeams || !std::isfinite(local_goal)) return false;
    for (double v : scan)
        if (!std::isfinite(v)) return false;
    return true;
}

RobotState make_state(const world::Scan& scan, double local_goal) {
    if (scan.ranges.size() != world::kScanBeams || !(scan.max_range > 0.0))
        throw InvalidArgument("make_state: invalid scan");
    RobotState s;
    s.scan.resize(scan.ranges.size());
    for (std::size_t i = 0; i < scan.ranges.size(); ++i) s.scan[i] = scan.ranges[i] / scan.max_range;
    s.local_goal = world::normalize_angle(local_goal);
    return s;
}

}  // namespace apple::planner
