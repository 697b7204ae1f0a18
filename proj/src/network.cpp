// SPDX-License-Identifier: Apache-2.0
#include "fldiag/network.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "fldiag/linalg.hpp"
#include "fldiag/toml.hpp"

namespace fldiag {

namespace fs = std::filesystem;

void NetworkConfig::validate() const {
    check(input_dim >= 1, "network: input_dim must be >= 1");
    check(hidden_width >= 1, "network: hidden_width must be >= 1");
    check(output_dim >= 1, "network: output_dim must be >= 1");
    check(gamma > 0.0, "network: gamma must be > 0");
}

std::size_t ModelState::param_count() const {
    std::size_t p = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        p += weights[l].size() + biases[l].size();
    return p;
}

Gradients Gradients::zeros_like(const ModelState& state) {
    Gradients g;
    g.weights.reserve(state.weights.size());
    g.biases.reserve(state.biases.size());
    for (std::size_t l = 0; l < state.weights.size(); ++l) {
        g.weights.emplace_back(state.weights[l].rows(), state.weights[l].cols());
        g.biases.emplace_back(state.biases[l].size(), 0.0);
    }
    return g;
}

double Gradients::squared_norm() const {
    double s = 0.0;
    for (const auto& w : weights)
        for (std::size_t i = 0; i < w.size(); ++i) s += w.data()[i] * w.data()[i];
    for (const auto& b : biases)
        for (double v : b) s += v * v;
    return s;
}

void Gradients::scale(double s) {
    for (auto& w : weights)
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] *= s;
    for (auto& b : biases)
        for (double& v : b) v *= s;
}

ModelState init_network(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    ModelState state;
    state.config = config;
    Rng rng = Rng(seed).child("network_init");
    const std::size_t layers = config.num_weight_layers();
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t fan_in = config.layer_in_dim(l);
        const std::size_t fan_out = config.layer_out_dim(l);
        double var;
        if (config.parameterization == Parameterization::MuP) {
            var = 1.0 / static_cast<double>(fan_in);
        } else {
            var = 2.0 / static_cast<double>(fan_in);
        }
        state.weights.push_back(gaussian(rng, fan_out, fan_in, std::sqrt(var)));
        state.biases.emplace_back(fan_out, 0.0);
    }
    return state;
}

namespace {

inline void add_bias_rows(Matrix& h, const std::vector<double>& b) {
    for (std::size_t i = 0; i < h.rows(); ++i) {
        double* row = h.row(i);
        for (std::size_t j = 0; j < h.cols(); ++j) row[j] += b[j];
    }
}

inline Matrix relu(const Matrix& h) {
    Matrix a = h;
    double* p = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
    return a;
}

} // namespace

Matrix forward(const ModelState& state, const Matrix& X, ForwardTrace& trace) {
    const auto& cfg = state.config;
    check(X.cols() == cfg.input_dim, "forward: input width mismatch");
    const std::size_t layers = cfg.num_weight_layers();
    trace.pre.assign(1, X);
    trace.post.assign(1, X);

    for (std::size_t l = 0; l < layers; ++l) {
        Matrix h = linalg::matmul_nt(trace.post[l], state.weights[l]);
        add_bias_rows(h, state.biases[l]);
        if (!h.all_finite()) throw std::runtime_error("forward: non-finite activation");
        const bool is_readout = (l + 1 == layers);
        if (is_readout) {
            if (cfg.gamma != 1.0) {
                double inv = 1.0 / cfg.gamma;
                for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] *= inv;
            }
            trace.pre.push_back(h);
            return h;
        }
        trace.pre.push_back(h);
        const bool next_is_readout = (l + 2 == layers);
        if (next_is_readout && cfg.literal_readout)
            trace.post.push_back(h);
        else
            trace.post.push_back(relu(h));
    }
    return trace.pre.back(); // unreachable; layers >= 1
}

Matrix forward(const ModelState& state, const Matrix& X) {
    ForwardTrace trace;
    return forward(state, X, trace);
}

Gradients backward(const ModelState& state, const ForwardTrace& trace,
                   const Matrix& upstream) {
    const auto& cfg = state.config;
    const std::size_t layers = cfg.num_weight_layers();
    check(trace.pre.size() == layers + 1, "backward: trace/layer mismatch");
    check(upstream.rows() == trace.pre[0].rows() && upstream.cols() == cfg.output_dim,
          "backward: upstream shape mismatch");

    Gradients grads = Gradients::zeros_like(state);
    // Readout sensitivity carries the 1/gamma output scale.
    Matrix delta = upstream;
    if (cfg.gamma != 1.0) {
        double inv = 1.0 / cfg.gamma;
        for (std::size_t i = 0; i < delta.size(); ++i) delta.data()[i] *= inv;
    }

    for (std::size_t l = layers; l-- > 0;) {
        grads.weights[l] = linalg::matmul_tn(delta, trace.post[l]);
        auto& db = grads.biases[l];
        for (std::size_t i = 0; i < delta.rows(); ++i) {
            const double* row = delta.row(i);
            for (std::size_t j = 0; j < delta.cols(); ++j) db[j] += row[j];
        }
        if (l == 0) break;
        Matrix next = linalg::matmul(delta, state.weights[l]);
        // Mask by the derivative of the layer-l input nonlinearity.
        const bool input_was_linear = (l + 1 == layers) && cfg.literal_readout;
        if (!input_was_linear) {
            const Matrix& pre = trace.pre[l];
            for (std::size_t i = 0; i < next.size(); ++i)
                if (pre.data()[i] <= 0.0) next.data()[i] = 0.0;
        }
        delta = std::move(next);
    }
    return grads;
}

Gradients backward(const ModelState& state, const Matrix& X, const Matrix& upstream) {
    ForwardTrace trace;
    forward(state, X, trace);
    return backward(state, trace, upstream);
}

Matrix feature_map(const ModelState& state, const Matrix& X, std::size_t layer,
                   bool post_activation) {
    const std::size_t layers = state.config.num_weight_layers();
    check(layer < layers, "feature_map: layer out of range");
    if (layer == 0) return X;
    ForwardTrace trace;
    forward(state, X, trace);
    if (post_activation) return relu(trace.pre[layer]);
    return trace.pre[layer];
}

std::vector<double> flatten(const Gradients& grads) {
    std::vector<double> flat;
    std::size_t total = 0;
    for (std::size_t l = 0; l < grads.weights.size(); ++l)
        total += grads.weights[l].size() + grads.biases[l].size();
    flat.reserve(total);
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        const Matrix& w = grads.weights[l];
        flat.insert(flat.end(), w.data(), w.data() + w.size());
        flat.insert(flat.end(), grads.biases[l].begin(), grads.biases[l].end());
    }
    return flat;
}

Matrix param_jacobian(const ModelState& state, const std::vector<double>& x) {
    const auto& cfg = state.config;
    check(x.size() == cfg.input_dim, "param_jacobian: wrong input length");
    Matrix X(1, cfg.input_dim);
    for (std::size_t j = 0; j < x.size(); ++j) X(0, j) = x[j];
    ForwardTrace trace;
    forward(state, X, trace);

    Matrix jac(cfg.output_dim, state.param_count());
    for (std::size_t unit = 0; unit < cfg.output_dim; ++unit) {
        Matrix upstream(1, cfg.output_dim);
        upstream(0, unit) = 1.0;
        Gradients g = backward(state, trace, upstream);
        std::vector<double> flat = flatten(g);
        for (std::size_t j = 0; j < flat.size(); ++j) jac(unit, j) = flat[j];
    }
    return jac;
}

void save_checkpoint(const ModelState& state, const std::string& dir, std::uint64_t seed) {
    fs::create_directories(dir);
    const auto& cfg = state.config;
    toml::Document doc;
    doc.root.set("input_dim", cfg.input_dim);
    doc.root.set("hidden_width", cfg.hidden_width);
    doc.root.set("hidden_layers", cfg.hidden_layers);
    doc.root.set("output_dim", cfg.output_dim);
    doc.root.set("gamma", cfg.gamma);
    doc.root.set("parameterization",
                 cfg.parameterization == Parameterization::MuP ? "mup" : "standard");
    doc.root.set("literal_readout", cfg.literal_readout);
    doc.root.set("seed", seed);
    doc.root.set("param_order", "w1,b1,...,wL,bL row-major");
    toml::write_file(doc, dir + "/meta.toml");
    for (std::size_t l = 0; l < state.weights.size(); ++l) {
        save_matrix(state.weights[l], dir + "/w" + std::to_string(l + 1) + ".bin");
        Matrix b(1, state.biases[l].size());
        for (std::size_t j = 0; j < b.cols(); ++j) b(0, j) = state.biases[l][j];
        save_matrix(b, dir + "/b" + std::to_string(l + 1) + ".bin");
    }
}

ModelState load_checkpoint(const std::string& dir) {
    toml::Document doc = toml::parse_file(dir + "/meta.toml");
    NetworkConfig cfg;
    cfg.input_dim = static_cast<std::size_t>(doc.root.get_int("input_dim", 1));
    cfg.hidden_width = static_cast<std::size_t>(doc.root.get_int("hidden_width", 1));
    cfg.hidden_layers = static_cast<std::size_t>(doc.root.get_int("hidden_layers", 1));
    cfg.output_dim = static_cast<std::size_t>(doc.root.get_int("output_dim", 1));
    cfg.gamma = doc.root.get_float("gamma", 1.0);
    cfg.parameterization = doc.root.get_string("parameterization", "mup") == "standard"
                               ? Parameterization::Standard
                               : Parameterization::MuP;
    cfg.literal_readout = doc.root.get_bool("literal_readout", false);
    ModelState state;
    state.config = cfg;
    for (std::size_t l = 0; l < cfg.num_weight_layers(); ++l) {
        state.weights.push_back(load_matrix(dir + "/w" + std::to_string(l + 1) + ".bin"));
        Matrix b = load_matrix(dir + "/b" + std::to_string(l + 1) + ".bin");
        std::vector<double> bias(b.data(), b.data() + b.size());
        state.biases.push_back(std::move(bias));
    }
    return state;
}

} // namespace fldiag
