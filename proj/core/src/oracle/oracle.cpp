#include "apple/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace apple::oracle {

void OracleConfig::validate() const {
    if (levels != 0 && levels < 2) throw InvalidArgument("oracle: levels must be >= 2 or 0 (continuous)");
    if (!(rate_hz > 0.0)) throw InvalidArgument("oracle: rate_hz must be positive");
    if (!(e_max > 0.0)) throw InvalidArgument("oracle: e_max must be positive");
}

double oracle_feedback(double v, double g) noexcept { return v * std::cos(g); }

int discretize(double e, const OracleConfig& cfg) {
    if (cfg.continuous()) throw InvalidArgument("discretize: continuous oracle has no levels");
    if (!(std::abs(e) <= cfg.e_max))
        throw OutOfRange("discretize: |e| = " + std::to_string(std::abs(e)) + " exceeds e_max");
    const int level = static_cast<int>(std::floor((e + cfg.e_max) / (2.0 * cfg.e_max) * cfg.levels));
    return std::clamp(level, 0, cfg.levels - 1);
}

Discretizer::Discretizer(OracleConfig cfg) : cfg_(cfg) { cfg_.validate(); }

int Discretizer::operator()(double e) {
    if (!(std::abs(e) <= cfg_.e_max)) {
        ++clamped_;
        e = std::isnan(e) ? 0.0 : std::clamp(e, -cfg_.e_max, cfg_.e_max);
    }
    return discretize(e, cfg_);
}

}  // namespace apple::oracle
