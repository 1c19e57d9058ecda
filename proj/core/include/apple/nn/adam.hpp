#pragma once

#include <cstdint>
#include <vector>

#include "apple/nn/mlp.hpp"

namespace apple::nn {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// First/second moment accumulators shaped like an Mlp's parameters.
struct AdamState {
    AdamConfig config;
    std::int64_t step_count = 0;
    std::vector<Matrix> m_weight, v_weight;
    std::vector<Vector> m_bias, v_bias;

    AdamState() = default;
    AdamState(const Mlp& net, AdamConfig cfg);

    friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update of `net` (descent direction).
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

/// Adam on a single scalar parameter (used for the entropy temperature).
struct ScalarAdam {
    AdamConfig config;
    std::int64_t step_count = 0;
    double m = 0.0;
    double v = 0.0;

    double step(double param, double grad);

    friend bool operator==(const ScalarAdam&, const ScalarAdam&) = default;
};

}  // namespace apple::nn
