// SPDX-License-Identifier: Apache-2.0
#include "fldiag/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fldiag/linalg.hpp"
#include "fldiag/toml.hpp"

namespace fldiag {

void TrainConfig::validate() const {
    check(base_lr > 0.0, "train: base_lr must be > 0");
    check(grad_clip > 0.0, "train: grad_clip must be > 0");
    check(batch_size >= 1, "train: batch_size must be >= 1");
    check(weight_decay >= 0.0, "train: weight_decay must be >= 0");
}

std::vector<double> per_layer_lrs(const NetworkConfig& net, const TrainConfig& train) {
    const std::size_t layers = net.num_weight_layers();
    std::vector<double> lrs(layers, train.base_lr);
    if (net.parameterization == Parameterization::Standard) return lrs;
    for (std::size_t l = 1; l < layers; ++l)
        lrs[l] = train.base_lr / static_cast<double>(net.layer_in_dim(l));
    return lrs;
}

double cosine_lr(std::size_t step, std::size_t total_steps, double eta) {
    check(step <= total_steps, "cosine_lr: step beyond total");
    if (total_steps == 0) return eta;
    constexpr double pi = 3.14159265358979323846;
    double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return eta * (1.0 + std::cos(pi * frac)) / 2.0;
}

void clip_gradients(Gradients& grads, double max_norm) {
    check(max_norm > 0.0, "clip_gradients: max_norm must be > 0");
    double norm = std::sqrt(grads.squared_norm());
    if (norm > max_norm) grads.scale(max_norm / norm);
}

namespace {

double softmax_cross_entropy_row(const double* logits, const double* target,
                                 std::size_t n, double* grad_out) {
    double max_logit = logits[0];
    for (std::size_t j = 1; j < n; ++j) max_logit = std::max(max_logit, logits[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(logits[j] - max_logit);
    double loss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double p = std::exp(logits[j] - max_logit) / z;
        if (grad_out) grad_out[j] = p - target[j];
        if (target[j] != 0.0) loss -= target[j] * (logits[j] - max_logit - std::log(z));
    }
    return loss;
}

/// Mean loss and (optionally) its gradient with respect to predictions.
double loss_and_grad(const Matrix& pred, const Matrix& target, Loss loss, Matrix* grad) {
    check(pred.rows() == target.rows() && pred.cols() == target.cols(),
          "loss: prediction/target shape mismatch");
    check(pred.rows() > 0, "loss: empty batch");
    const double inv = 1.0 / static_cast<double>(pred.size());
    double total = 0.0;
    if (loss == Loss::Mse) {
        // Mean over all entries of the squared error.
        for (std::size_t i = 0; i < pred.size(); ++i) {
            double d = pred.data()[i] - target.data()[i];
            total += d * d;
            if (grad) grad->data()[i] = 2.0 * d * inv;
        }
        return total * inv;
    }
    const double row_inv = 1.0 / static_cast<double>(pred.rows());
    for (std::size_t i = 0; i < pred.rows(); ++i) {
        total += softmax_cross_entropy_row(pred.row(i), target.row(i), pred.cols(),
                                           grad ? grad->row(i) : nullptr);
    }
    if (grad)
        for (std::size_t i = 0; i < grad->size(); ++i) grad->data()[i] *= row_inv;
    return total * row_inv;
}

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;

    explicit AdamState(const ModelState& model) {
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            m_w.emplace_back(model.weights[l].rows(), model.weights[l].cols());
            v_w.emplace_back(model.weights[l].rows(), model.weights[l].cols());
            m_b.emplace_back(model.biases[l].size(), 0.0);
            v_b.emplace_back(model.biases[l].size(), 0.0);
        }
    }
};

inline void adam_update(double* param, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double bias1, double bias2, double decay_step) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        double mhat = m[i] / bias1;
        double vhat = v[i] / bias2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + eps) + decay_step * param[i];
    }
}

} // namespace

double mean_loss(const Matrix& predictions, const Matrix& targets, Loss loss) {
    return loss_and_grad(predictions, targets, loss, nullptr);
}

double gen_error(const ModelState& model, const Dataset& test, Loss loss) {
    check(test.size() > 0, "gen_error: empty test set");
    Matrix pred = forward(model, test.X);
    return mean_loss(pred, test.Y, loss);
}

std::pair<ModelState, TrainReport> train(const ModelState& model, const Dataset& ds,
                                         const TrainConfig& cfg) {
    cfg.validate();
    check(ds.X.cols() == model.config.input_dim, "train: dataset input width mismatch");
    check(ds.Y.cols() == model.config.output_dim, "train: dataset output width mismatch");
    const auto t0 = std::chrono::steady_clock::now();

    ModelState state = model;
    TrainReport report;
    if (cfg.epochs == 0) return {state, report};

    const std::size_t m = ds.size();
    const std::vector<double> lrs = per_layer_lrs(state.config, cfg);
    AdamState adam(state);
    Rng batch_rng = Rng(cfg.seed).child("batch_order");
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr_scale = cosine_lr(epoch, cfg.epochs, 1.0);
        auto order = batch_rng.permutation(m);
        double epoch_loss = 0.0;
        std::size_t batches = 0;

        for (std::size_t start = 0; start < m; start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, m - start);
            std::vector<std::size_t> idx(order.begin() + start,
                                          order.begin() + start + count);
            Matrix xb = ds.X.take_rows(idx);
            Matrix yb = ds.Y.take_rows(idx);

            ForwardTrace trace;
            Matrix pred = forward(state, xb, trace);
            Matrix grad_out(pred.rows(), pred.cols());
            double loss = loss_and_grad(pred, yb, cfg.loss, &grad_out);
            if (!std::isfinite(loss)) throw TrainingDiverged(epoch, loss);
            epoch_loss += loss;
            ++batches;

            Gradients grads = backward(state, trace, grad_out);
            if (cfg.optimizer == Optimizer::Adam && cfg.weight_decay > 0.0) {
                // Coupled L2: decay enters the gradient before clipping.
                for (std::size_t l = 0; l < grads.weights.size(); ++l)
                    for (std::size_t i = 0; i < grads.weights[l].size(); ++i)
                        grads.weights[l].data()[i] +=
                            cfg.weight_decay * state.weights[l].data()[i];
            }
            clip_gradients(grads, cfg.grad_clip);

            ++step;
            const double bias1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double bias2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            // Decoupled decay is applied with the scheduled base rate for
            // every layer rather than the per-layer rate.
            const double decay_step = cfg.optimizer == Optimizer::AdamW
                                          ? lr_scale * cfg.base_lr * cfg.weight_decay
                                          : 0.0;
            for (std::size_t l = 0; l < state.weights.size(); ++l) {
                const double lr = lr_scale * lrs[l];
                adam_update(state.weights[l].data(), adam.m_w[l].data(),
                            adam.v_w[l].data(), grads.weights[l].data(),
                            state.weights[l].size(), lr, cfg.adam_beta1, cfg.adam_beta2,
                            cfg.adam_eps, bias1, bias2, decay_step);
                adam_update(state.biases[l].data(), adam.m_b[l].data(),
                            adam.v_b[l].data(), grads.biases[l].data(),
                            state.biases[l].size(), lr, cfg.adam_beta1, cfg.adam_beta2,
                            cfg.adam_eps, bias1, bias2, 0.0);
            }
        }
        report.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
    }

    report.final_train_loss = report.epoch_losses.back();
    report.total_steps = step;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {state, report};
}

void save_train_report(const TrainReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    toml::Document doc;
    doc.root.set("final_train_loss", report.final_train_loss);
    if (report.final_test_loss >= 0.0)
        doc.root.set("final_test_loss", report.final_test_loss);
    doc.root.set("wall_seconds", report.wall_seconds);
    doc.root.set("total_steps", report.total_steps);
    doc.root.set("epochs", report.epoch_losses.size());
    toml::write_file(doc, dir + "/report.toml");

    std::ofstream os(dir + "/losses.csv");
    os << "epoch,train_loss\n";
    char buf[64];
    for (std::size_t e = 0; e < report.epoch_losses.size(); ++e) {
        std::snprintf(buf, sizeof(buf), "%.17g", report.epoch_losses[e]);
        os << e << "," << buf << "\n";
    }
}

} // namespace fldiag
