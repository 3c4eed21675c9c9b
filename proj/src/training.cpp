#include "fedonet/training.hpp"

#include "fedonet/evaluation.hpp"
#include "fedonet/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace fedonet {

std::pair<double, Tensor3> mse_loss(const Tensor3& pred, const Tensor3& target) {
    if (pred.n != target.n || pred.q != target.q || pred.c != target.c)
        throw std::invalid_argument("mse_loss: shape mismatch");
    const double count = static_cast<double>(pred.size());
    Tensor3 grad(pred.n, pred.q, pred.c);
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.v.size(); ++i) {
        const double d = pred.v[i] - target.v[i];
        loss += d * d;
        grad.v[i] = 2.0 * d / count;
    }
    return {loss / count, std::move(grad)};
}

namespace {

// First k entries of a deterministic partial Fisher-Yates shuffle of 0..n-1.
std::vector<std::int64_t> sample_without_replacement(std::int64_t n, std::int64_t k, Rng& rng) {
    std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (std::int64_t i = 0; i < k; ++i) {
        const std::int64_t j = i + static_cast<std::int64_t>(rng.next_u64() % static_cast<std::uint64_t>(n - i));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

std::vector<std::int64_t> sample_indices(std::int64_t n, std::int64_t k, Rng& rng, bool& replaced) {
    if (k <= n) return sample_without_replacement(n, k, rng);
    replaced = true;
    std::vector<std::int64_t> idx(static_cast<std::size_t>(k));
    for (std::int64_t i = 0; i < k; ++i)
        idx[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(rng.next_u64() % static_cast<std::uint64_t>(n));
    return idx;
}

}  // namespace

Batch make_batches(const Dataset& ds, const TrainConfig& cfg, int step) {
    if (ds.count() < 1 || ds.train_count < 1)
        throw std::invalid_argument("make_batches: dataset has no training samples");
    if (cfg.batch_functions < 1 || cfg.queries_per_function < 1)
        throw std::invalid_argument("make_batches: batch sizes must be >= 1");

    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(step)));
    const std::int64_t b = cfg.batch_functions;
    const std::int64_t q_per = cfg.queries_per_function;
    const std::int64_t q_all = ds.coords.rows();
    const int c = ds.spec.out_channels;
    const int d = ds.spec.coord_dim();

    Batch batch;
    batch.fn_indices = sample_indices(ds.train_count, b, rng, batch.with_replacement);
    batch.u.resize(b, ds.branch.cols());
    batch.coords.resize(b * q_per, d);
    batch.targets = Tensor3(b, q_per, c);
    for (std::int64_t i = 0; i < b; ++i) {
        const std::int64_t fn = batch.fn_indices[static_cast<std::size_t>(i)];
        batch.u.row(i) = ds.branch.row(fn);
        const auto queries = sample_indices(q_all, q_per, rng, batch.with_replacement);
        const auto target = ds.target(fn);
        for (std::int64_t j = 0; j < q_per; ++j) {
            const std::int64_t qj = queries[static_cast<std::size_t>(j)];
            batch.coords.row(i * q_per + j) = ds.coords.row(qj);
            for (int ch = 0; ch < c; ++ch)
                batch.targets.at(i, j, ch) = target[static_cast<std::size_t>(qj * c + ch)];
        }
    }
    return batch;
}

double scheduled_lr(const TrainConfig& cfg, int step) {
    if (cfg.lr_schedule == LrSchedule::Constant) return cfg.lr;
    return cfg.lr * std::pow(cfg.gamma, static_cast<double>(step / cfg.lr_every));
}

TrainResult train(DeepOnetModel model, const Dataset& ds, const TrainConfig& cfg,
                  const AdamState* resume_branch, const AdamState* resume_trunk, int start_step,
                  const std::function<void(const LossEntry&)>& on_eval) {
    if (model.config.sensor_count != ds.spec.sensor_count() ||
        model.config.coord_dim != ds.spec.coord_dim() ||
        model.config.out_channels != ds.spec.out_channels)
        throw std::invalid_argument("train: model does not match the dataset benchmark");
    if (!(cfg.lr > 0.0) || cfg.gamma <= 0.0 || cfg.gamma > 1.0)
        throw std::invalid_argument("train: lr must be positive and gamma in (0,1]");

    TrainResult result;
    result.branch_adam = resume_branch ? *resume_branch : adam_init(model.branch);
    result.trunk_adam = resume_trunk ? *resume_trunk : adam_init(model.trunk);
    result.final_step = start_step;

    ModelCache cache;
    for (int step = start_step; step < cfg.max_steps; ++step) {
        const Batch batch = make_batches(ds, cfg, step);
        const Tensor3 pred =
            model_forward_paired(model, batch.u, batch.coords, cfg.queries_per_function, &cache);
        auto [loss, grad] = mse_loss(pred, batch.targets);

        LossEntry entry;
        entry.step = step;
        entry.train_mse = loss;
        if (!std::isfinite(loss)) {
            result.history.entries.push_back(entry);
            result.diverged = true;
            break;
        }
        const bool last = step == cfg.max_steps - 1;
        if ((step % cfg.eval_every == 0 || last) && ds.test_count() > 0) {
            entry.holdout_rel_l2 = evaluate_model(model, ds, Split::Test).mean;
            if (on_eval) on_eval(entry);
        }
        result.history.entries.push_back(entry);

        const ModelGrads grads =
            model_backward_paired(model, cache, grad, cfg.queries_per_function);
        try {
            const double lr = scheduled_lr(cfg, step);
            adam_step(result.branch_adam, model.branch, grads.branch, lr);
            adam_step(result.trunk_adam, model.trunk, grads.trunk, lr);
        } catch (const DivergenceError&) {
            result.diverged = true;
            break;
        }
        result.final_step = step + 1;
    }
    result.model = std::move(model);
    return result;
}

void write_loss_csv(const LossHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_loss_csv: cannot open " + path);
    out << "step,train_mse,holdout_rel_l2\n";
    char buf[40];
    for (const auto& e : history.entries) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.train_mse);
        out << e.step << "," << buf << ",";
        if (e.holdout_rel_l2) {
            std::snprintf(buf, sizeof(buf), "%.17g", *e.holdout_rel_l2);
            out << buf;
        }
        out << "\n";
    }
}

SupersetDemoResult superset_demo(int max_steps, std::uint64_t seed) {
    const int grid_n = 2048;
    const int batch = 256;
    const double lr = 1e-3;

    Matrix zeta(grid_n, 1);
    Vector target(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        zeta(i, 0) = static_cast<double>(i) / static_cast<double>(grid_n);
        target(i) = std::sin(100.0 * std::numbers::pi * zeta(i, 0));
    }
    const FreqMatrix freq = sample_frequency_matrix(128, 1, 50.0, mix_seed(seed, 7));
    const Matrix phi = fourier_embed_batch(freq, zeta);

    auto fit = [&](const Matrix& inputs, std::uint64_t net_seed) {
        MlpParams net = mlp_init({static_cast<int>(inputs.cols()), 128, 128, 1}, Activation::Tanh, net_seed);
        AdamState adam = adam_init(net);
        Rng rng(mix_seed(net_seed, 13));
        Matrix xb(batch, inputs.cols());
        Matrix yb(batch, 1);
        for (int step = 0; step < max_steps; ++step) {
            for (int i = 0; i < batch; ++i) {
                const auto row = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(grid_n));
                xb.row(i) = inputs.row(row);
                yb(i, 0) = target(row);
            }
            auto [y, cache] = mlp_forward(net, xb);
            const Matrix dl = 2.0 * (y - yb) / static_cast<double>(batch);
            auto [grads, dx] = mlp_backward(net, cache, dl);
            adam_step(adam, net, grads, lr);
        }
        const Matrix y = mlp_forward_nocache(net, inputs);
        return (y.col(0) - target).squaredNorm() / static_cast<double>(grid_n);
    };

    SupersetDemoResult r;
    r.steps = max_steps;
    r.fedonet_mse = fit(phi, mix_seed(seed, 1));
    r.vanilla_mse = fit(zeta, mix_seed(seed, 2));
    return r;
}

}  // namespace fedonet
