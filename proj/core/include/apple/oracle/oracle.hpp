#pragma once

#include <cstddef>

#include "apple/error.hpp"

namespace apple::oracle {

APPLE_DEFINE_ERROR(OutOfRange);

/// Simulated supervisor settings. levels == 0 means continuous feedback.
struct OracleConfig {
    int levels = 3;
    double rate_hz = 1.0;
    /// Largest feedback magnitude: the global max_vel_x bound, shared by all
    /// parameter sets so levels are comparable across them.
    double e_max = 2.0;

    [[nodiscard]] bool continuous() const noexcept { return levels == 0; }
    void validate() const;
};

/// Projection of the linear velocity on the local-goal direction: v cos(g).
/// Depends only on the instantaneous (v, g) pair.
[[nodiscard]] double oracle_feedback(double v, double g) noexcept;

/// Uniform bins over [-e_max, e_max]:
///   level = min(L - 1, floor((e + e_max) / (2 e_max) * L)).
/// Throws OutOfRange when |e| > e_max. Not defined for continuous configs.
[[nodiscard]] int discretize(double e, const OracleConfig& cfg);

/// Episode-context variant: out-of-range values are clamped to +-e_max and
/// counted instead of raising.
class Discretizer {
public:
    explicit Discretizer(OracleConfig cfg);

    [[nodiscard]] int operator()(double e);
    [[nodiscard]] std::size_t clamped_count() const noexcept { return clamped_; }
    [[nodiscard]] const OracleConfig& config() const noexcept { return cfg_; }

private:
    OracleConfig cfg_;
    std::size_t clamped_ = 0;
};

}  // namespace apple::oracle
