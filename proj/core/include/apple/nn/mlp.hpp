#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "apple/error.hpp"
#include "apple/rng.hpp"

namespace apple::nn {

APPLE_DEFINE_ERROR(ShapeMismatch);

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Affine layer y = W x + b with W of shape (out, in).
struct Dense {
    Matrix weight;
    Vector bias;
};

/// Parameter-shaped gradient of a scalar objective, plus the gradient with
/// respect to the network input (one column per sample).
struct Gradients {
    std::vector<Matrix> weight;
    std::vector<Vector> bias;
    Matrix input;

    void set_zero();
    Gradients& operator+=(const Gradients& other);
    Gradients& operator*=(double s);
};

/// Fully connected network: ReLU on hidden layers, linear output layer.
/// Batched calls take one sample per column.
class Mlp {
public:
    /// Activations kept from a forward pass for the backward pass.
    struct Tape {
        std::vector<Matrix> inputs;  // input to each layer
        std::vector<Matrix> pre;     // pre-activation of each layer
    };

    Mlp() = default;
    /// All-zero parameters.
    explicit Mlp(std::vector<int> layer_sizes);
    /// He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
    static Mlp he_uniform(std::vector<int> layer_sizes, Rng& rng);

    [[nodiscard]] const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
    [[nodiscard]] int input_size() const noexcept { return sizes_.front(); }
    [[nodiscard]] int output_size() const noexcept { return sizes_.back(); }
    [[nodiscard]] std::size_t num_layers() const noexcept { return layers_.size(); }
    [[nodiscard]] std::size_t num_params() const noexcept;
    [[nodiscard]] const std::vector<Dense>& layers() const noexcept { return layers_; }
    [[nodiscard]] std::vector<Dense>& layers() noexcept { return layers_; }

    [[nodiscard]] Vector forward(const Vector& input) const;
    [[nodiscard]] Matrix forward_batch(const Matrix& inputs) const;
    [[nodiscard]] Matrix forward_batch(const Matrix& inputs, Tape& tape) const;

    /// Reverse-mode gradient of sum(output .* output_grad) over the batch
    /// recorded in `tape`. ReLU'(0) is taken as 0.
    [[nodiscard]] Gradients backward(const Tape& tape, const Matrix& output_grad) const;
    /// Single-sample convenience form.
    [[nodiscard]] Gradients backward(const Vector& input, const Vector& output_grad) const;

    [[nodiscard]] Gradients zero_gradients() const;

    /// Parameters flattened layer by layer (weights column-major, then bias).
    [[nodiscard]] std::vector<double> flat_params() const;
    void set_flat_params(const std::vector<double>& flat);
    [[nodiscard]] bool all_finite() const noexcept;

    friend bool operator==(const Mlp& a, const Mlp& b);

private:
    void check_input(Eigen::Index rows) const;

    std::vector<int> sizes_;
    std::vector<Dense> layers_;
};

}  // namespace apple::nn
