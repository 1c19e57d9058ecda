#include "apple/nn/adam.hpp"

#include <cmath>

namespace apple::nn {

AdamState::AdamState(const Mlp& net, AdamConfig cfg) : config(cfg) {
    for (const auto& l : net.layers()) {
        m_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
        v_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
        m_bias.push_back(Vector::Zero(l.bias.size()));
        v_bias.push_back(Vector::Zero(l.bias.size()));
    }
}

namespace {

template <typename P>
void update(P& param, const P& grad, P& m, P& v, const AdamConfig& c, double bc1, double bc2) {
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
    param.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
}

}  // namespace

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
    auto& layers = net.layers();
    if (grads.weight.size() != layers.size() || state.m_weight.size() != layers.size())
        throw ShapeMismatch("adam_step: gradient/state depth does not match network");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (grads.weight[l].rows() != layers[l].weight.rows() || grads.weight[l].cols() != layers[l].weight.cols() ||
            grads.bias[l].size() != layers[l].bias.size())
            throw ShapeMismatch("adam_step: gradient shape does not match layer");
    }
    ++state.step_count;
    const auto t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.config.beta1, t);
    const double bc2 = 1.0 - std::pow(state.config.beta2, t);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        update<Matrix>(layers[l].weight, grads.weight[l], state.m_weight[l], state.v_weight[l], state.config, bc1, bc2);
        update<Vector>(layers[l].bias, grads.bias[l], state.m_bias[l], state.v_bias[l], state.config, bc1, bc2);
    }
}

double ScalarAdam::step(double param, double grad) {
    ++step_count;
    const auto t = static_cast<double>(step_count);
    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = config.beta2 * v + (1.0 - config.beta2) * grad * grad;
    const double mhat = m / (1.0 - std::pow(config.beta1, t));
    const double vhat = v / (1.0 - std::pow(config.beta2, t));
    return param - config.lr * mhat / (std::sqrt(vhat) + config.eps);
}

}  // namespace apple::nn
