#include "fedonet/model.hpp"

#include "fedonet/rng.hpp"

#include <string>

namespace fedonet {

namespace {

std::string width_error(const char* what, std::int64_t got, const char* must, std::int64_t want) {
    return std::string("model config: ") + what + " (" + std::to_string(got) + ") must equal " + must +
           " (" + std::to_string(want) + ")";
}

}  // namespace

void validate_config(const ModelConfig& config) {
    if (config.branch_layers.size() < 2 || config.trunk_layers.size() < 2)
        throw std::invalid_argument("model config: branch and trunk need at least 2 layer sizes");
    if (config.latent_p < 1 || config.out_channels < 1)
        throw std::invalid_argument("model config: latent_p and out_channels must be >= 1");
    const int latent_width = config.latent_p * config.out_channels;
    if (config.branch_layers.back() != latent_width)
        throw std::invalid_argument(width_error("branch output width", config.branch_layers.back(),
                                                "latent_p*out_channels", latent_width));
    if (config.trunk_layers.back() != latent_width)
        throw std::invalid_argument(width_error("trunk output width", config.trunk_layers.back(),
                                                "latent_p*out_channels", latent_width));
    if (config.branch_layers.front() != config.sensor_count)
        throw std::invalid_argument(width_error("branch input width", config.branch_layers.front(),
                                                "sensor_count", config.sensor_count));
    if (config.variant == Variant::Fedonet) {
        if (!config.embed.has_value())
            throw std::invalid_argument("model config: fedonet variant requires embed settings");
        const int want = 2 * config.embed->mapping_size;
        if (config.trunk_layers.front() != want)
            throw std::invalid_argument(
                width_error("trunk input width", config.trunk_layers.front(), "2*mapping_size", want));
    } else {
        if (config.trunk_layers.front() != config.coord_dim)
            throw std::invalid_argument(width_error("trunk input width", config.trunk_layers.front(),
                                                    "coord_dim", config.coord_dim));
    }
}

DeepOnetModel build_model(const ModelConfig& config, std::uint64_t seed) {
    validate_config(config);
    DeepOnetModel m;
    m.config = config;
    m.branch = mlp_init(config.branch_layers, config.activation, mix_seed(seed, 1));
    m.trunk = mlp_init(config.trunk_layers, config.activation, mix_seed(seed, 2));
    if (config.variant == Variant::Fedonet)
        m.freq = sample_frequency_matrix(config.embed->mapping_size, config.coord_dim,
                                         config.embed->sigma, config.embed->seed);
    return m;
}

Matrix trunk_input(const DeepOnetModel& model, const Matrix& coords) {
    if (coords.cols() != model.config.coord_dim)
        throw std::invalid_argument("model: coords width must equal coord_dim");
    if (model.config.variant == Variant::Fedonet) return fourier_embed_batch(*model.freq, coords);
    return coords;
}

Tensor3 model_forward(const DeepOnetModel& model, const Matrix& u_batch, const Matrix& coords,
                      ModelCache* cache) {
    if (u_batch.cols() != model.config.sensor_count)
        throw std::invalid_argument("model_forward: u width must equal sensor_count");
    ModelCache local;
    ModelCache& cc = cache ? *cache : local;
    std::tie(cc.branch_out, cc.branch) = mlp_forward(model.branch, u_batch);
    std::tie(cc.trunk_out, cc.trunk) = mlp_forward(model.trunk, trunk_input(model, coords));

    const std::int64_t n = u_batch.rows(), q = coords.rows();
    const int p = model.config.latent_p, c = model.config.out_channels;
    Tensor3 pred(n, q, c);
    for (int ch = 0; ch < c; ++ch) {
        const Matrix block =
            cc.branch_out.middleCols(ch * p, p) * cc.trunk_out.middleCols(ch * p, p).transpose();
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < q; ++j) pred.at(i, j, ch) = block(i, j);
    }
    return pred;
}

ModelGrads model_backward(const DeepOnetModel& model, const ModelCache& cache, const Tensor3& dL_dpred) {
    const std::int64_t n = cache.branch_out.rows(), q = cache.trunk_out.rows();
    const int p = model.config.latent_p, c = model.config.out_channels;
    if (dL_dpred.n != n || dL_dpred.q != q || dL_dpred.c != c)
        throw std::invalid_argument("model_backward: dL_dpred shape mismatch");

    Matrix d_branch = Matrix::Zero(n, cache.branch_out.cols());
    Matrix d_trunk = Matrix::Zero(q, cache.trunk_out.cols());
    Matrix d_ch(n, q);
    for (int ch = 0; ch < c; ++ch) {
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < q; ++j) d_ch(i, j) = dL_dpred.at(i, j, ch);
        d_branch.middleCols(ch * p, p).noalias() = d_ch * cache.trunk_out.middleCols(ch * p, p);
        d_trunk.middleCols(ch * p, p).noalias() = d_ch.transpose() * cache.branch_out.middleCols(ch * p, p);
    }
    ModelGrads g;
    g.branch = mlp_backward(model.branch, cache.branch, d_branch).first;
    g.trunk = mlp_backward(model.trunk, cache.trunk, d_trunk).first;
    return g;
}

Tensor3 model_forward_paired(const DeepOnetModel& model, const Matrix& u_batch, const Matrix& coords,
                             std::int64_t per_fn, ModelCache* cache) {
    if (u_batch.cols() != model.config.sensor_count)
        throw std::invalid_argument("model_forward_paired: u width must equal sensor_count");
    if (coords.rows() != u_batch.rows() * per_fn)
        throw std::invalid_argument("model_forward_paired: coords rows must equal n*per_fn");
    ModelCache local;
    ModelCache& cc = cache ? *cache : local;
    std::tie(cc.branch_out, cc.branch) = mlp_forward(model.branch, u_batch);
    std::tie(cc.trunk_out, cc.trunk) = mlp_forward(model.trunk, trunk_input(model, coords));

    const std::int64_t n = u_batch.rows();
    const int p = model.config.latent_p, c = model.config.out_channels;
    Tensor3 pred(n, per_fn, c);
    for (std::int64_t i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const Vector vals = cc.trunk_out.block(i * per_fn, ch * p, per_fn, p) *
                                cc.branch_out.row(i).segment(ch * p, p).transpose();
            for (std::int64_t j = 0; j < per_fn; ++j) pred.at(i, j, ch) = vals(j);
        }
    }
    return pred;
}

ModelGrads model_backward_paired(const DeepOnetModel& model, const ModelCache& cache,
                                 const Tensor3& dL_dpred, std::int64_t per_fn) {
    const std::int64_t n = cache.branch_out.rows();
    const int p = model.config.latent_p, c = model.config.out_channels;
    if (dL_dpred.n != n || dL_dpred.q != per_fn || dL_dpred.c != c)
        throw std::invalid_argument("model_backward_paired: dL_dpred shape mismatch");

    Matrix d_branch = Matrix::Zero(n, cache.branch_out.cols());
    Matrix d_trunk = Matrix::Zero(cache.trunk_out.rows(), cache.trunk_out.cols());
    Vector dvec(per_fn);
    for (std::int64_t i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            for (std::int64_t j = 0; j < per_fn; ++j) dvec(j) = dL_dpred.at(i, j, ch);
            d_trunk.block(i * per_fn, ch * p, per_fn, p).noalias() =
                dvec * cache.branch_out.row(i).segment(ch * p, p);
            d_branch.row(i).segment(ch * p, p).noalias() =
                (cache.trunk_out.block(i * per_fn, ch * p, per_fn, p).transpose() * dvec).transpose();
        }
    }
    ModelGrads g;
    g.branch = mlp_backward(model.branch, cache.branch, d_branch).first;
    g.trunk = mlp_backward(model.trunk, cache.trunk, d_trunk).first;
    return g;
}

Matrix predict_field(const DeepOnetModel& model, const Vector& u, const Matrix& coord_grid) {
    Matrix u_row = u.transpose();
    const Tensor3 pred = model_forward(model, u_row, coord_grid);
    Matrix out(pred.q, pred.c);
    for (std::int64_t j = 0; j < pred.q; ++j)
        for (std::int64_t ch = 0; ch < pred.c; ++ch) out(j, ch) = pred.at(0, j, ch);
    return out;
}

}  // namespace fedonet
