#include "apple/learn/box_space.hpp"

#include <algorithm>
#include <cmath>

namespace apple::learn {

BoxSpace BoxSpace::from_bounds(const planner::ParamBounds& b) {
    BoxSpace s;
    for (std::size_t d = 0; d < planner::kParamDims; ++d) {
        s.lo.push_back(b.lo[d]);
        s.hi.push_back(b.hi[d]);
        s.integer.push_back(planner::param_is_integer(d));
    }
    return s;
}

void BoxSpace::validate() const {
    if (lo.empty() || lo.size() != hi.size() || lo.size() != integer.size())
        throw InvalidArgument("BoxSpace: inconsistent dimensions");
    for (std::size_t d = 0; d < lo.size(); ++d)
        if (!(lo[d] < hi[d])) throw InvalidArgument("BoxSpace: lo must be below hi");
}

std::vector<double> BoxSpace::decode(const std::vector<double>& z) const {
    if (z.size() != dim()) throw InvalidArgument("BoxSpace::decode: dimension mismatch");
    std::vector<double> out(dim());
    for (std::size_t d = 0; d < dim(); ++d) out[d] = lo[d] + (z[d] + 1.0) * half_range(d);
    return out;
}

std::vector<double> BoxSpace::encode(const std::vector<double>& theta) const {
    if (theta.size() != dim()) throw InvalidArgument("BoxSpace::encode: dimension mismatch");
    std::vector<double> out(dim());
    for (std::size_t d = 0; d < dim(); ++d) out[d] = (theta[d] - lo[d]) / half_range(d) - 1.0;
    return out;
}

std::vector<double> BoxSpace::round_clamp(const std::vector<double>& theta) const {
    if (theta.size() != dim()) throw InvalidArgument("BoxSpace::round_clamp: dimension mismatch");
    std::vector<double> out(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
        double v = std::isfinite(theta[d]) ? theta[d] : lo[d];
        if (integer[d]) v = std::round(v);
        out[d] = std::clamp(v, lo[d], hi[d]);
    }
    return out;
}

}  // namespace apple::learn
