#include "fedonet/nn.hpp"

#include "fedonet/rng.hpp"

#include <cmath>
#include <string>

namespace fedonet {

namespace {

void apply_activation(Matrix& z, Activation act) {
    if (act == Activation::Tanh)
        z = z.array().tanh();
    else
        z = z.cwiseMax(0.0);
}

// Derivative expressed through the activation value (tanh) or the
// pre-activation sign (relu).
Matrix activation_derivative(const Matrix& pre, const Matrix& act_val, Activation act) {
    if (act == Activation::Tanh) return 1.0 - act_val.array().square();
    return (pre.array() > 0.0).cast<double>();
}

}  // namespace

std::int64_t MlpParams::parameter_count() const {
    std::int64_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

MlpParams mlp_init(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("mlp_init: need at least 2 layer sizes");
    for (int s : layer_sizes)
        if (s < 1) throw std::invalid_argument("mlp_init: layer sizes must be positive");

    MlpParams p;
    p.layer_sizes = layer_sizes;
    p.activation = activation;
    const int n_layers = static_cast<int>(layer_sizes.size()) - 1;
    p.weights.reserve(n_layers);
    p.biases.reserve(n_layers);
    for (int l = 0; l < n_layers; ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(l)));
        Matrix w(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i)
            for (int j = 0; j < fan_in; ++j) w(i, j) = stddev * rng.normal();
        p.weights.push_back(std::move(w));
        p.biases.push_back(Vector::Zero(fan_out));
    }
    return p;
}

std::pair<Matrix, ForwardCache> mlp_forward(const MlpParams& params, const Matrix& x) {
    if (x.cols() != params.input_size())
        throw std::invalid_argument("mlp_forward: input width " + std::to_string(x.cols()) +
                                    " != layer_sizes[0] " + std::to_string(params.input_size()));
    ForwardCache cache;
    cache.input = x;
    const int n_layers = params.layer_count();
    cache.pre.resize(n_layers);
    cache.act.resize(n_layers);
    const Matrix* a = &cache.input;
    for (int l = 0; l < n_layers; ++l) {
        cache.pre[l] = (*a * params.weights[l].transpose()).rowwise() + params.biases[l].transpose();
        cache.act[l] = cache.pre[l];
        if (l + 1 < n_layers) apply_activation(cache.act[l], params.activation);
        a = &cache.act[l];
    }
    return {cache.act.back(), std::move(cache)};
}

Matrix mlp_forward_nocache(const MlpParams& params, const Matrix& x) {
    if (x.cols() != params.input_size())
        throw std::invalid_argument("mlp_forward: input width mismatch");
    Matrix a = x;
    const int n_layers = params.layer_count();
    for (int l = 0; l < n_layers; ++l) {
        a = (a * params.weights[l].transpose()).rowwise() + params.biases[l].transpose();
        if (l + 1 < n_layers) apply_activation(a, params.activation);
    }
    return a;
}

std::pair<MlpGrads, Matrix> mlp_backward(const MlpParams& params, const ForwardCache& cache,
                                         const Matrix& dL_dy) {
    const int n_layers = params.layer_count();
    if (static_cast<int>(cache.pre.size()) != n_layers)
        throw std::invalid_argument("mlp_backward: cache does not match params");
    if (dL_dy.rows() != cache.input.rows() || dL_dy.cols() != params.output_size())
        throw std::invalid_argument("mlp_backward: dL_dy shape mismatch");

    MlpGrads g;
    g.weights.resize(n_layers);
    g.biases.resize(n_layers);
    Matrix delta = dL_dy;
    for (int l = n_layers - 1; l >= 0; --l) {
        const Matrix& a_prev = (l == 0) ? cache.input : cache.act[l - 1];
        g.weights[l] = delta.transpose() * a_prev;
        g.biases[l] = delta.colwise().sum();
        if (l > 0) {
            delta = (delta * params.weights[l]).cwiseProduct(
                activation_derivative(cache.pre[l - 1], cache.act[l - 1], params.activation));
        } else {
            delta = delta * params.weights[0];
        }
    }
    return {std::move(g), std::move(delta)};
}

MlpGrads zero_grads_like(const MlpParams& params) {
    MlpGrads g;
    g.weights.reserve(params.weights.size());
    g.biases.reserve(params.biases.size());
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        g.weights.push_back(Matrix::Zero(params.weights[l].rows(), params.weights[l].cols()));
        g.biases.push_back(Vector::Zero(params.biases[l].size()));
    }
    return g;
}

void add_grads(MlpGrads& into, const MlpGrads& g) {
    for (std::size_t l = 0; l < into.weights.size(); ++l) {
        into.weights[l] += g.weights[l];
        into.biases[l] += g.biases[l];
    }
}

AdamState adam_init(const MlpParams& params) {
    AdamState s;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        s.m_w.push_back(Matrix::Zero(params.weights[l].rows(), params.weights[l].cols()));
        s.v_w.push_back(Matrix::Zero(params.weights[l].rows(), params.weights[l].cols()));
        s.m_b.push_back(Vector::Zero(params.biases[l].size()));
        s.v_b.push_back(Vector::Zero(params.biases[l].size()));
    }
    return s;
}

void adam_step(AdamState& state, MlpParams& params, const MlpGrads& grads, double lr) {
    if (!(lr > 0.0)) throw std::invalid_argument("adam_step: lr must be positive");
    const std::size_t n_layers = params.weights.size();
    if (grads.weights.size() != n_layers || state.m_w.size() != n_layers)
        throw std::invalid_argument("adam_step: layer count mismatch");
    for (std::size_t l = 0; l < n_layers; ++l) {
        if (grads.weights[l].rows() != params.weights[l].rows() ||
            grads.weights[l].cols() != params.weights[l].cols() ||
            grads.biases[l].size() != params.biases[l].size())
            throw std::invalid_argument("adam_step: gradient shape mismatch");
        if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite())
            throw DivergenceError("adam_step: non-finite gradient at layer " + std::to_string(l));
    }

    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t l = 0; l < n_layers; ++l) {
        state.m_w[l] = state.beta1 * state.m_w[l] + (1.0 - state.beta1) * grads.weights[l];
        state.v_w[l] = state.beta2 * state.v_w[l].array() +
                       (1.0 - state.beta2) * grads.weights[l].array().square();
        state.m_b[l] = state.beta1 * state.m_b[l] + (1.0 - state.beta1) * grads.biases[l];
        state.v_b[l] = state.beta2 * state.v_b[l].array() +
                       (1.0 - state.beta2) * grads.biases[l].array().square();

        params.weights[l].array() -= lr * (state.m_w[l].array() / bc1) /
                                     ((state.v_w[l].array() / bc2).sqrt() + state.epsilon);
        params.biases[l].array() -= lr * (state.m_b[l].array() / bc1) /
                                    ((state.v_b[l].array() / bc2).sqrt() + state.epsilon);
    }
}

}  // namespace fedonet
