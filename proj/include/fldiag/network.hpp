// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fldiag/matrix.hpp"
#include "fldiag/rng.hpp"

namespace fldiag {

enum class Parameterization { Standard, MuP };

/// ReLU MLP configuration. `hidden_layers` counts hidden layers only; the
/// readout adds one more weight matrix, so a "depth 4" network carries five
/// weight layers. `gamma` divides the readout output. `literal_readout`
/// feeds the readout the raw last pre-activation instead of its ReLU image.
struct NetworkConfig {
    std::size_t input_dim = 1;
    std::size_t hidden_width = 1;
    std::size_t hidden_layers = 1;
    std::size_t output_dim = 1;
    double gamma = 1.0;
    Parameterization parameterization = Parameterization::MuP;
    bool literal_readout = false;

    void validate() const;
    std::size_t num_weight_layers() const { return hidden_layers + 1; }
    /// Width of the input feeding weight layer l (0-based).
    std::size_t layer_in_dim(std::size_t l) const {
        return l == 0 ? input_dim : hidden_width;
    }
    /// Width of the output of weight layer l (0-based).
    std::size_t layer_out_dim(std::size_t l) const {
        return l + 1 == num_weight_layers() ? output_dim : hidden_width;
    }
};

struct ModelState {
    NetworkConfig config;
    std::vector<Matrix> weights;            // weights[l]: out_dim x in_dim
    std::vector<std::vector<double>> biases; // biases[l]: out_dim

    std::size_t param_count() const;
};

/// Per-weight-layer gradient (or parameter-delta) container matching
/// ModelState's shapes.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    static Gradients zeros_like(const ModelState& state);
    double squared_norm() const;
    void scale(double s);
};

/// Batch forward pass record: pre[l] holds the pre-activations of weight
/// layer l (pre[0] aliases the input batch at index h^0).
struct ForwardTrace {
    std::vector<Matrix> pre;  // pre[0] = X, pre[l] = h^l for l >= 1
    std::vector<Matrix> post; // post[l] = layer-(l+1) input: post[0]=X, else relu(h^l)
};

/// Initialization: MuP uses Var(W^1) = 1/n0, Var(W^l) = 1/n_{l-1}, readout
/// Var = 1/N; Standard uses He-style Var(W^l) = 2/n_{l-1}. All biases zero.
ModelState init_network(const NetworkConfig& config, std::uint64_t seed);

/// Outputs are (1/gamma) * readout. X is m x input_dim.
Matrix forward(const ModelState& state, const Matrix& X);
Matrix forward(const ModelState& state, const Matrix& X, ForwardTrace& trace);

/// Exact gradients of <upstream, f(X)> with respect to every weight/bias.
Gradients backward(const ModelState& state, const Matrix& X, const Matrix& upstream);
Gradients backward(const ModelState& state, const ForwardTrace& trace,
                   const Matrix& upstream);

/// Layer feature map over a batch: l = 0 returns X, otherwise the layer-l
/// pre-activations h^l (post_activation applies the ReLU image instead).
Matrix feature_map(const ModelState& state, const Matrix& X, std::size_t layer,
                   bool post_activation = false);

/// Jacobian of the outputs at a single input row, one row per output unit,
/// columns in the flat parameter order (W^1, b^1, ..., W^L, b^L), row-major
/// within each weight matrix.
Matrix param_jacobian(const ModelState& state, const std::vector<double>& x);

/// Flatten gradients into the documented parameter order.
std::vector<double> flatten(const Gradients& grads);

/// Checkpoint directory: meta.toml + w1.bin, b1.bin, ...
void save_checkpoint(const ModelState& state, const std::string& dir,
                     std::uint64_t seed = 0);
ModelState load_checkpoint(const std::string& dir);

} // namespace fldiag
