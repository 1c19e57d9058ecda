#pragma once

#include <span>

#include "apple/error.hpp"

namespace apple::evalx {

/// Regularised incomplete beta I_x(a, b) by Lentz's continued fraction.
[[nodiscard]] double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `dof`
/// degrees of freedom (dof may be fractional).
[[nodiscard]] double student_t_two_sided(double t, double dof);

enum class TTestCase {
    Regular,
    /// Both samples constant with equal means: t = 0, p = 1.
    Degenerate,
    /// Both samples constant with different means: |t| = inf, p = 0.
    Separated,
};

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double dof = 0.0;
    TTestCase kind = TTestCase::Regular;
};

/// Welch's unequal-variance t-test. t > 0 when mean(a) > mean(b).
/// Throws InvalidArgument for fewer than two samples in either group.
[[nodiscard]] TTestResult welch_ttest(std::span<const double> a, std::span<const double> b);

[[nodiscard]] double mean(std::span<const double> x);
/// Unbiased sample variance (n - 1 denominator).
[[nodiscard]] double sample_variance(std::span<const double> x);

}  // namespace apple::evalx
