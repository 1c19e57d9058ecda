#pragma once

#include <cstddef>
#include <vector>

#include "apple/planner/params.hpp"

namespace apple::learn {

/// Axis-aligned box the continuous policy acts in. Squashed actions
/// z in [-1, 1] map affinely onto [lo, hi]; integer dims are rounded only
/// when producing an executable parameter vector.
struct BoxSpace {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<bool> integer;

    [[nodiscard]] std::size_t dim() const noexcept { return lo.size(); }
    [[nodiscard]] static BoxSpace from_bounds(const planner::ParamBounds& b);
    void validate() const;

    /// z in [-1, 1]^d -> lo + (z + 1) / 2 * (hi - lo), unrounded.
    [[nodiscard]] std::vector<double> decode(const std::vector<double>& z) const;
    /// Inverse of decode.
    [[nodiscard]] std::vector<double> encode(const std::vector<double>& theta) const;
    /// Round integer dims to nearest, clamp all dims into [lo, hi].
    [[nodiscard]] std::vector<double> round_clamp(const std::vector<double>& theta) const;
    /// d theta / d z for each dim, i.e. (hi - lo) / 2.
    [[nodiscard]] double half_range(std::size_t d) const noexcept { return 0.5 * (hi[d] - lo[d]); }

    friend bool operator==(const BoxSpace&, const BoxSpace&) = default;
};

}  // namespace apple::learn
