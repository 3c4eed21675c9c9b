#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fedonet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { Tanh, Relu };

// Thrown when an optimizer step receives non-finite gradients.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense feed-forward network. weights[l] has shape (fan_out, fan_in);
// the activation applies to hidden layers, the output layer is linear.
// Batches are row-per-sample project-wide.
struct MlpParams {
    std::vector<int> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    Activation activation = Activation::Tanh;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    int layer_count() const { return static_cast<int>(weights.size()); }
    std::int64_t parameter_count() const;
};

// Per-layer pre-activations and activations of one forward pass.
struct ForwardCache {
    Matrix input;
    std::vector<Matrix> pre;  // z_l = a_{l-1} W_l^T + b_l
    std::vector<Matrix> act;  // a_l (equals pre on the output layer)
};

struct MlpGrads {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

struct AdamState {
    std::int64_t step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<Matrix> m_w, v_w;
    std::vector<Vector> m_b, v_b;
};

// Glorot-normal weights (variance 2/(fan_in+fan_out)), zero biases,
// deterministic per seed.
MlpParams mlp_init(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed);

std::pair<Matrix, ForwardCache> mlp_forward(const MlpParams& params, const Matrix& x);
Matrix mlp_forward_nocache(const MlpParams& params, const Matrix& x);

// Exact reverse-mode gradients of the scalar loss whose output gradient is
// dL_dy. Returns (parameter grads, dL_dx).
std::pair<MlpGrads, Matrix> mlp_backward(const MlpParams& params, const ForwardCache& cache,
                                         const Matrix& dL_dy);

MlpGrads zero_grads_like(const MlpParams& params);
void add_grads(MlpGrads& into, const MlpGrads& g);

AdamState adam_init(const MlpParams& params);

// Standard Adam update with bias correction. Rejects non-finite gradients
// with DivergenceError before touching the state.
void adam_step(AdamState& state, MlpParams& params, const MlpGrads& grads, double lr);

}  // namespace fedonet
