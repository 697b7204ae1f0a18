// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fldiag/dataset.hpp"
#include "fldiag/network.hpp"

namespace fldiag {

enum class Loss { Mse, CrossEntropy };
enum class Optimizer { Adam, AdamW };

struct TrainConfig {
    double base_lr = 1e-3;
    double weight_decay = 0.0;
    std::size_t batch_size = 64;
    std::size_t epochs = 1;
    double grad_clip = 1.0;
    Loss loss = Loss::Mse;
    Optimizer optimizer = Optimizer::AdamW;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_losses; // mean train loss per epoch
    double final_train_loss = 0.0;
    double final_test_loss = -1.0; // < 0 when no test set was evaluated
    double wall_seconds = 0.0;
    std::size_t total_steps = 0;
};

/// Thrown when the training loss becomes non-finite; carries where.
struct TrainingDiverged : std::runtime_error {
    std::size_t epoch;
    double loss;
    TrainingDiverged(std::size_t epoch_, double loss_)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch_)),
          epoch(epoch_), loss(loss_) {}
};

/// Per-weight-layer learning rates. MuP: eta_1 = base, hidden eta_l =
/// base / n_{l-1}, readout eta = base / N. Standard: base everywhere.
/// A layer's bias shares its weight learning rate.
std::vector<double> per_layer_lrs(const NetworkConfig& net, const TrainConfig& train);

/// Cosine annealing from eta down to 0 across total_steps.
double cosine_lr(std::size_t step, std::size_t total_steps, double eta);

/// Scale all gradients by max_norm/|g| when the global l2 norm exceeds it.
void clip_gradients(Gradients& grads, double max_norm);

/// Mean loss over rows given predictions and targets.
double mean_loss(const Matrix& predictions, const Matrix& targets, Loss loss);

/// Mean loss of the model on a test set.
double gen_error(const ModelState& model, const Dataset& test, Loss loss);

/// Mini-batch Adam/AdamW with per-layer learning rates, per-epoch cosine
/// annealing, and global-norm clipping. Deterministic for a fixed seed.
/// epochs == 0 returns the input model unchanged.
std::pair<ModelState, TrainReport> train(const ModelState& model, const Dataset& ds,
                                         const TrainConfig& cfg);

void save_train_report(const TrainReport& report, const std::string& dir);

} // namespace fldiag
