#include "apple/nn/mlp.hpp"

#include <cmath>
#include <string>

namespace apple::nn {

void Gradients::set_zero() {
    for (auto& w : weight) w.setZero();
    for (auto& b : bias) b.setZero();
    input.setZero();
}

Gradients& Gradients::operator+=(const Gradients& other) {
    if (other.weight.size() != weight.size()) throw ShapeMismatch("gradient sets differ in depth");
    for (std::size_t l = 0; l < weight.size(); ++l) {
        weight[l] += other.weight[l];
        bias[l] += other.bias[l];
    }
    if (input.size() == other.input.size()) input += other.input;
    return *this;
}

Gradients& Gradients::operator*=(double s) {
    for (auto& w : weight) w *= s;
    for (auto& b : bias) b *= s;
    input *= s;
    return *this;
}

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw ShapeMismatch("Mlp needs at least an input and an output size");
    for (int s : sizes_)
        if (s <= 0) throw ShapeMismatch("Mlp layer sizes must be positive");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
        layers_.push_back({Matrix::Zero(sizes_[l + 1], sizes_[l]), Vector::Zero(sizes_[l + 1])});
}

Mlp Mlp::he_uniform(std::vector<int> layer_sizes, Rng& rng) {
    Mlp net(std::move(layer_sizes));
    for (auto& layer : net.layers_) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.cols()));
        // Column-major fill order keeps the draw sequence independent of Eigen.
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
                layer.weight(r, c) = rng.uniform(-limit, limit);
    }
    return net;
}

std::size_t Mlp::num_params() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

void Mlp::check_input(Eigen::Index rows) const {
    if (layers_.empty()) throw ShapeMismatch("Mlp is empty");
    if (rows != sizes_.front())
        throw ShapeMismatch("Mlp input has " + std::to_string(rows) + " rows, expected " +
                            std::to_string(sizes_.front()));
}

Vector Mlp::forward(const Vector& input) const {
    check_input(input.size());
    Vector h = input;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Vector z = layers_[l].weight * h + layers_[l].bias;
        if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
        h = std::move(z);
    }
    return h;
}

Matrix Mlp::forward_batch(const Matrix& inputs) const {
    Tape tape;
    return forward_batch(inputs, tape);
}

Matrix Mlp::forward_batch(const Matrix& inputs, Tape& tape) const {
    check_input(inputs.rows());
    tape.inputs.resize(layers_.size());
    tape.pre.resize(layers_.size());
    Matrix h = inputs;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        tape.inputs[l] = h;
        Matrix z = layers_[l].weight * h;
        z.colwise() += layers_[l].bias;
        tape.pre[l] = z;
        if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
        h = std::move(z);
    }
    return h;
}

Gradients Mlp::backward(const Tape& tape, const Matrix& output_grad) const {
    if (tape.pre.size() != layers_.size()) throw ShapeMismatch("backward: tape does not match network");
    if (output_grad.rows() != sizes_.back() || output_grad.cols() != tape.pre.back().cols())
        throw ShapeMismatch("backward: output gradient shape mismatch");
    Gradients g;
    g.weight.resize(layers_.size());
    g.bias.resize(layers_.size());
    Matrix delta = output_grad;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        if (i + 1 < layers_.size()) {
            // ReLU derivative: 1 where pre-activation > 0, else 0 (including 0).
            delta = delta.cwiseProduct((tape.pre[i].array() > 0.0).cast<double>().matrix());
        }
        g.weight[i] = delta * tape.inputs[i].transpose();
        g.bias[i] = delta.rowwise().sum();
        delta = layers_[i].weight.transpose() * delta;
    }
    g.input = std::move(delta);
    return g;
}

Gradients Mlp::backward(const Vector& input, const Vector& output_grad) const {
    if (output_grad.size() != sizes_.back()) throw ShapeMismatch("backward: output gradient shape mismatch");
    Tape tape;
    (void)forward_batch(Matrix(input), tape);
    return backward(tape, Matrix(output_grad));
}

Gradients Mlp::zero_gradients() const {
    Gradients g;
    for (const auto& l : layers_) {
        g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
        g.bias.push_back(Vector::Zero(l.bias.size()));
    }
    g.input = Matrix::Zero(sizes_.front(), 1);
    return g;
}

std::vector<double> Mlp::flat_params() const {
    std::vector<double> out;
    out.reserve(num_params());
    for (const auto& l : layers_) {
        out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
        out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
    }
    return out;
}

void Mlp::set_flat_params(const std::vector<double>& flat) {
    if (flat.size() != num_params()) throw ShapeMismatch("set_flat_params: wrong parameter count");
    std::size_t k = 0;
    for (auto& l : layers_) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(k),
                  flat.begin() + static_cast<std::ptrdiff_t>(k + static_cast<std::size_t>(l.weight.size())),
                  l.weight.data());
        k += static_cast<std::size_t>(l.weight.size());
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(k),
                  flat.begin() + static_cast<std::ptrdiff_t>(k + static_cast<std::size_t>(l.bias.size())),
                  l.bias.data());
        k += static_cast<std::size_t>(l.bias.size());
    }
}

bool Mlp::all_finite() const noexcept {
    for (const auto& l : layers_)
        if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
    if (a.sizes_ != b.sizes_) return false;
    for (std::size_t l = 0; l < a.layers_.size(); ++l)
        if (a.layers_[l].weight != b.layers_[l].weight || a.layers_[l].bias != b.layers_[l].bias) return false;
    return true;
}

}  // namespace apple::nn
