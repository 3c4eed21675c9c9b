#pragma once

#include "fedonet/dataset.hpp"
#include "fedonet/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fedonet {

enum class LrSchedule { Constant, Step };

struct TrainConfig {
    int batch_functions = 32;
    int queries_per_function = 64;
    double lr = 1e-3;
    LrSchedule lr_schedule = LrSchedule::Step;
    double gamma = 0.5;    // decay factor of the step schedule
    int lr_every = 2000;   // steps between decays
    int max_steps = 6000;
    int eval_every = 500;
    std::uint64_t seed = 0;
};

struct LossEntry {
    int step = 0;
    double train_mse = 0.0;
    std::optional<double> holdout_rel_l2;
};

struct LossHistory {
    std::vector<LossEntry> entries;
};

struct Batch {
    Matrix u;                              // (B, m)
    Matrix coords;                         // (B*Q, d)
    Tensor3 targets;                       // (B, Q, c)
    std::vector<std::int64_t> fn_indices;  // length B
    bool with_replacement = false;         // batch exceeded the split size
};

// loss = mean over all (sample, query, channel) of the squared error;
// gradient = 2 (pred - target) / count.
std::pair<double, Tensor3> mse_loss(const Tensor3& pred, const Tensor3& target);

// Deterministic in (cfg.seed, step): batch_functions train-split function
// indices and queries_per_function query indices per function, each without
// replacement unless the request exceeds what is available.
Batch make_batches(const Dataset& ds, const TrainConfig& cfg, int step);

double scheduled_lr(const TrainConfig& cfg, int step);

struct TrainResult {
    DeepOnetModel model;
    LossHistory history;
    AdamState branch_adam;
    AdamState trunk_adam;
    bool diverged = false;
    int final_step = 0;  // number of completed steps
};

// Runs Adam steps start_step..max_steps-1. Train MSE is recorded every
// step; the holdout relative l2 every eval_every steps (and on the last
// step). On divergence the history up to the failing step is returned with
// the diverged flag set. Pass the optimizer states to resume a run; the
// resumed trajectory is identical to the uninterrupted one.
TrainResult train(DeepOnetModel model, const Dataset& ds, const TrainConfig& cfg,
                  const AdamState* resume_branch = nullptr, const AdamState* resume_trunk = nullptr,
                  int start_step = 0,
                  const std::function<void(const LossEntry&)>& on_eval = nullptr);

void write_loss_csv(const LossHistory& history, const std::string& path);

// Appendix-style demonstration: fit sin(100 pi zeta) on [0,1] with a
// Fourier-embedded trunk (sigma=50) versus a raw-coordinate trunk of the
// same architecture. Returns the final full-grid MSE of both fits.
struct SupersetDemoResult {
    double fedonet_mse = 0.0;
    double vanilla_mse = 0.0;
    int steps = 0;
};
SupersetDemoResult superset_demo(int max_steps, std::uint64_t seed);

}  // namespace fedonet
