#pragma once

#include "fedonet/fourier.hpp"
#include "fedonet/nn.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fedonet {

enum class Variant { Vanilla, Fedonet };

struct EmbedConfig {
    int mapping_size = 128;
    double sigma = 5.0;
    std::uint64_t seed = 0;
};

// Branch/trunk composition config. Widths must satisfy:
//   branch_layers.back() == trunk_layers.back() == latent_p * out_channels
//   trunk_layers.front() == 2*mapping_size (fedonet) or coord_dim (vanilla)
//   branch_layers.front() == sensor_count
struct ModelConfig {
    Variant variant = Variant::Vanilla;
    std::vector<int> branch_layers;
    std::vector<int> trunk_layers;
    int latent_p = 128;
    int out_channels = 1;
    int sensor_count = 0;
    int coord_dim = 0;
    Activation activation = Activation::Tanh;
    std::optional<EmbedConfig> embed;
};

struct DeepOnetModel {
    ModelConfig config;
    MlpParams branch;
    MlpParams trunk;
    std::optional<FreqMatrix> freq;
};

// (n samples, q queries, c channels), row-major.
struct Tensor3 {
    std::int64_t n = 0, q = 0, c = 0;
    std::vector<double> v;

    Tensor3() = default;
    Tensor3(std::int64_t n_, std::int64_t q_, std::int64_t c_)
        : n(n_), q(q_), c(c_), v(static_cast<std::size_t>(n_ * q_ * c_), 0.0) {}
    double& at(std::int64_t i, std::int64_t j, std::int64_t ch) {
        return v[static_cast<std::size_t>((i * q + j) * c + ch)];
    }
    double at(std::int64_t i, std::int64_t j, std::int64_t ch) const {
        return v[static_cast<std::size_t>((i * q + j) * c + ch)];
    }
    std::int64_t size() const { return n * q * c; }
};

struct ModelCache {
    ForwardCache branch;
    ForwardCache trunk;
    Matrix branch_out;  // (n, p*c)
    Matrix trunk_out;   // (rows, p*c)
};

struct ModelGrads {
    MlpGrads branch;
    MlpGrads trunk;
};

// Throws std::invalid_argument naming the violated width equality.
void validate_config(const ModelConfig& config);

DeepOnetModel build_model(const ModelConfig& config, std::uint64_t seed);

// Applies the Fourier embedding (fedonet) or passes coordinates through
// (vanilla). Coordinates are expected normalized to [0,1] per axis.
Matrix trunk_input(const DeepOnetModel& model, const Matrix& coords);

// Dense prediction: every sample against every query row.
// pred[i,j,ch] = sum_k branch[i, ch*p+k] * trunk[j, ch*p+k].
Tensor3 model_forward(const DeepOnetModel& model, const Matrix& u_batch, const Matrix& coords,
                      ModelCache* cache = nullptr);

ModelGrads model_backward(const DeepOnetModel& model, const ModelCache& cache, const Tensor3& dL_dpred);

// Paired prediction for training batches: sample i is evaluated only at its
// own coordinate block, rows [i*per_fn, (i+1)*per_fn) of coords.
Tensor3 model_forward_paired(const DeepOnetModel& model, const Matrix& u_batch, const Matrix& coords,
                             std::int64_t per_fn, ModelCache* cache = nullptr);

ModelGrads model_backward_paired(const DeepOnetModel& model, const ModelCache& cache,
                                 const Tensor3& dL_dpred, std::int64_t per_fn);

// One-sample convenience wrapper; returns (q, out_channels).
Matrix predict_field(const DeepOnetModel& model, const Vector& u, const Matrix& coord_grid);

}  // namespace fedonet
