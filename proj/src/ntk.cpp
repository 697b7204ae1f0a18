// SPDX-License-Identifier: Apache-2.0
#include "fldiag/ntk.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "fldiag/toml.hpp"

namespace fldiag {

void save_kernel(const KernelMatrix& k, const std::string& dir) {
    std::filesystem::create_directories(dir);
    save_matrix(k.entries, dir + "/entries.bin");
    toml::Document doc;
    doc.root.set("left_id", k.left_id);
    doc.root.set("right_id", k.right_id);
    doc.root.set("provenance", k.provenance);
    toml::write_file(doc, dir + "/meta.toml");
}

KernelMatrix load_kernel(const std::string& dir) {
    KernelMatrix k;
    k.entries = load_matrix(dir + "/entries.bin");
    toml::Document doc = toml::parse_file(dir + "/meta.toml");
    k.left_id = doc.root.get_string("left_id", "");
    k.right_id = doc.root.get_string("right_id", "");
    k.provenance = doc.root.get_string("provenance", "");
    return k;
}

namespace {

/// Layer inputs and per-layer output sensitivities of one output unit for
/// every sample: the two factors of the per-layer kernel blocks.
struct TangentFactors {
    std::vector<Matrix> inputs; // inputs[l]: m x in_dim(l)
    std::vector<Matrix> deltas; // deltas[l]: m x out_dim(l)
};

TangentFactors tangent_factors(const ModelState& state, const Matrix& x,
                               std::size_t unit) {
    const auto& cfg = state.config;
    const std::size_t layers = cfg.num_weight_layers();
    ForwardTrace trace;
    forward(state, x, trace);

    TangentFactors f;
    f.inputs = trace.post; // post[l] feeds weight layer l, one entry per layer
    f.deltas.resize(layers);

    Matrix delta(x.rows(), cfg.output_dim);
    const double inv_gamma = 1.0 / cfg.gamma;
    for (std::size_t i = 0; i < x.rows(); ++i) delta(i, unit) = inv_gamma;

    for (std::size_t l = layers; l-- > 0;) {
        f.deltas[l] = delta;
        if (l == 0) break;
        Matrix next = linalg::matmul(delta, state.weights[l]);
        const bool input_was_linear = (l + 1 == layers) && cfg.literal_readout;
        if (!input_was_linear) {
            const Matrix& pre = trace.pre[l];
            for (std::size_t i = 0; i < next.size(); ++i)
                if (pre.data()[i] <= 0.0) next.data()[i] = 0.0;
        }
        delta = std::move(next);
    }
    return f;
}

/// One (row-block, col-block) tile: sum over layers of
/// (delta gram) .* (input gram + 1), the +1 carrying the bias gradients.
void ntk_tile(const TangentFactors& fa, const TangentFactors& fb, std::size_t i0,
              std::size_t i1, std::size_t j0, std::size_t j1, Matrix& out) {
    for (std::size_t l = 0; l < fa.inputs.size(); ++l) {
        const Matrix& ia = fa.inputs[l];
        const Matrix& ib = fb.inputs[l];
        const Matrix& da = fa.deltas[l];
        const Matrix& db = fb.deltas[l];
        const std::size_t in_dim = ia.cols();
        const std::size_t out_dim = da.cols();
        for (std::size_t i = i0; i < i1; ++i) {
            for (std::size_t j = j0; j < j1; ++j) {
                double g_in = linalg::dot(ia.row(i), ib.row(j), in_dim);
                double g_delta = linalg::dot(da.row(i), db.row(j), out_dim);
                out(i, j) += g_delta * (g_in + 1.0);
            }
        }
    }
}

KernelMatrix empirical_ntk_impl(const ModelState& state, const Matrix& xa,
                                const Matrix& xb, std::size_t block, bool parallel) {
    const auto& cfg = state.config;
    check(xa.cols() == cfg.input_dim && xb.cols() == cfg.input_dim,
          "empirical_ntk: input width mismatch");
    check(block >= 1, "empirical_ntk: block size must be >= 1");
    const std::size_t ma = xa.rows(), mb = xb.rows();
    const bool same = (&xa == &xb) || (xa == xb);

    KernelMatrix kernel;
    kernel.entries = Matrix(ma, mb);
    kernel.provenance = "empirical ntk; params w1,b1,...,wL,bL row-major";

    for (std::size_t unit = 0; unit < cfg.output_dim; ++unit) {
        TangentFactors fa = tangent_factors(state, xa, unit);
        TangentFactors fb = same ? fa : tangent_factors(state, xb, unit);

        const std::size_t nbi = (ma + block - 1) / block;
        const std::size_t nbj = (mb + block - 1) / block;
        Matrix& out = kernel.entries;
        if (parallel) {
            const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(nbi * nbj);
#pragma omp parallel for schedule(dynamic)
            for (std::ptrdiff_t t = 0; t < total; ++t) {
                const std::size_t bi = static_cast<std::size_t>(t) / nbj;
                const std::size_t bj = static_cast<std::size_t>(t) % nbj;
                ntk_tile(fa, fb, bi * block, std::min(ma, (bi + 1) * block), bj * block,
                         std::min(mb, (bj + 1) * block), out);
            }
        } else {
            for (std::size_t bi = 0; bi < nbi; ++bi)
                for (std::size_t bj = 0; bj < nbj; ++bj)
                    ntk_tile(fa, fb, bi * block, std::min(ma, (bi + 1) * block),
                             bj * block, std::min(mb, (bj + 1) * block), out);
        }
    }

    if (same) {
        Matrix& k = kernel.entries;
        for (std::size_t i = 0; i < ma; ++i)
            for (std::size_t j = i + 1; j < ma; ++j) {
                double v = 0.5 * (k(i, j) + k(j, i));
                k(i, j) = v;
                k(j, i) = v;
            }
    }
    return kernel;
}

} // namespace

KernelMatrix empirical_ntk(const ModelState& state, const Matrix& xa, const Matrix& xb,
                           std::size_t block) {
    return empirical_ntk_impl(state, xa, xb, block, true);
}

KernelMatrix empirical_ntk_serial(const ModelState& state, const Matrix& xa,
                                  const Matrix& xb, std::size_t block) {
    return empirical_ntk_impl(state, xa, xb, block, false);
}

double default_ridge(const KernelMatrix& k_train) {
    const Matrix& k = k_train.entries;
    double trace = 0.0;
    for (std::size_t i = 0; i < k.rows(); ++i) trace += k(i, i);
    return 1e-6 * trace / static_cast<double>(k.rows());
}

Matrix ntk_predict(const KernelMatrix& k_train, const Matrix& y,
                   const KernelMatrix& k_test_train, std::optional<double> ridge) {
    check(k_train.square(), "ntk_predict: training kernel must be square");
    check(k_train.entries.rows() == y.rows(), "ntk_predict: label count mismatch");
    check(k_test_train.entries.cols() == k_train.entries.rows(),
          "ntk_predict: cross-kernel width mismatch");
    const double lambda = ridge ? *ridge : default_ridge(k_train);
    Matrix alpha = linalg::solve_spd(k_train.entries, y, lambda);
    return linalg::matmul(k_test_train.entries, alpha);
}

Matrix LinearizedPredictor::predict(const Matrix& x) const {
    Matrix out = forward(state0, x);
    if (alpha.rows() == 0) return out;
    KernelMatrix cross = empirical_ntk(state0, x, train_x);
    Matrix correction = linalg::matmul(cross.entries, alpha);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += correction.data()[i];
    return out;
}

LinearizedPredictor linearize_and_train(const ModelState& state0, const Dataset& ds,
                                        const LinearizeConfig& cfg) {
    check(state0.config.output_dim == 1, "linearize_and_train: scalar outputs only");
    LinearizedPredictor pred;
    pred.state0 = state0;
    pred.train_x = ds.X;
    const std::size_t m = ds.size();
    pred.alpha = Matrix(m, 1);
    if (cfg.max_iters == 0) return pred;

    KernelMatrix kernel = empirical_ntk(state0, ds.X, ds.X);
    Matrix f0 = forward(state0, ds.X);
    std::vector<double> residual0(m);
    double r0_norm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        residual0[i] = ds.Y(i, 0) - f0(i, 0);
        r0_norm2 += residual0[i] * residual0[i];
    }
    if (r0_norm2 == 0.0) return pred;

    // Heavy-ball gradient descent in the dual with step/momentum from the
    // kernel's extreme eigenvalues; identical trajectory to primal descent
    // on the frozen tangent features starting at theta_0.
    Spectrum spec = linalg::sym_eig(kernel.entries);
    double lmax = std::max(spec.eigenvalues.front(), 0.0);
    if (lmax <= 0.0) return pred;
    double lmin = lmax;
    for (double v : spec.eigenvalues)
        if (v > 1e-12 * lmax) lmin = std::min(lmin, v);
    const double sqa = std::sqrt(lmax), sqi = std::sqrt(lmin);
    const double eta = 4.0 / ((sqa + sqi) * (sqa + sqi));
    const double mu = ((sqa - sqi) / (sqa + sqi)) * ((sqa - sqi) / (sqa + sqi));

    std::vector<double> alpha(m, 0.0), prev(m, 0.0), grad(m, 0.0);
    const Matrix& k = kernel.entries;
    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        double res_norm2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double s = linalg::dot(k.row(i), alpha.data(), m) - residual0[i];
            grad[i] = s;
            res_norm2 += s * s;
        }
        if (res_norm2 <= cfg.tol * cfg.tol * r0_norm2) break;
        for (std::size_t i = 0; i < m; ++i) {
            double next = alpha[i] - eta * grad[i] + mu * (alpha[i] - prev[i]);
            prev[i] = alpha[i];
            alpha[i] = next;
        }
    }
    for (std::size_t i = 0; i < m; ++i) pred.alpha(i, 0) = alpha[i];
    return pred;
}

Matrix kernel_gradient_flow(const KernelMatrix& k, const Matrix& y, double t,
                            const Spectrum& spectrum) {
    check(k.square(), "kernel_gradient_flow: kernel must be square");
    check(k.entries.rows() == y.rows(), "kernel_gradient_flow: label count mismatch");
    check(t >= 0.0, "kernel_gradient_flow: t must be >= 0");
    const std::size_t n = y.rows();
    check(spectrum.eigenvalues.size() == n, "kernel_gradient_flow: spectrum size mismatch");

    Matrix projections(n, y.cols());
    for (std::size_t kmode = 0; kmode < n; ++kmode) {
        const double lambda = std::max(spectrum.eigenvalues[kmode], 0.0);
        const double decay = std::exp(-lambda * t);
        for (std::size_t c = 0; c < y.cols(); ++c) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                proj += spectrum.eigenvectors(i, kmode) * (-y(i, c));
            projections(kmode, c) = decay * proj;
        }
    }
    return projections;
}

double cka(const KernelMatrix& k1, const KernelMatrix& k2) {
    check(k1.square() && k2.square(), "cka: kernels must be square");
    check(k1.entries.rows() == k2.entries.rows(), "cka: size mismatch");
    const std::size_t n = k1.entries.rows();
    if (n == 0) return 0.0;

    auto centered = [n](const Matrix& k) {
        std::vector<double> row_mean(n, 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += k(i, j);
            row_mean[i] = s / static_cast<double>(n);
            total += s;
        }
        total /= static_cast<double>(n) * static_cast<double>(n);
        Matrix c(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                c(i, j) = k(i, j) - row_mean[i] - row_mean[j] + total;
        return c;
    };

    Matrix c1 = centered(k1.entries);
    Matrix c2 = centered(k2.entries);
    double inner = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) {
        inner += c1.data()[i] * c2.data()[i];
        n1 += c1.data()[i] * c1.data()[i];
        n2 += c2.data()[i] * c2.data()[i];
    }
    if (n1 == 0.0 || n2 == 0.0) return 0.0;
    double value = inner / (std::sqrt(n1) * std::sqrt(n2));
    return std::min(1.0, std::max(0.0, value));
}

double fl_strength_ntk(const ModelState& state0, const ModelState& state_t,
                       const Matrix& x_probe) {
    check(state0.config.num_weight_layers() == state_t.config.num_weight_layers(),
          "fl_strength_ntk: architecture mismatch");
    KernelMatrix k0 = empirical_ntk(state0, x_probe, x_probe);
    KernelMatrix kt = empirical_ntk(state_t, x_probe, x_probe);
    return 1.0 - cka(k0, kt);
}

FlGapResult fl_gap(double nn_error, double ntk_error, std::size_t m) {
    check(nn_error >= 0.0 && ntk_error >= 0.0, "fl_gap: errors must be >= 0");
    FlGapResult r;
    r.m = m;
    r.nn_error = nn_error;
    r.ntk_error = ntk_error;
    r.gap = ntk_error - nn_error;
    return r;
}

std::optional<std::size_t> critical_m(const std::vector<std::size_t>& m_grid,
                                      const std::vector<double>& nn_errors,
                                      const std::vector<double>& ntk_errors,
                                      double epsilon) {
    check(m_grid.size() == nn_errors.size() && m_grid.size() == ntk_errors.size(),
          "critical_m: curves must share the m-grid");
    check(epsilon > 0.0 && epsilon < 1.0, "critical_m: epsilon must be in (0,1)");
    std::optional<std::size_t> result;
    for (std::size_t i = m_grid.size(); i-- > 0;) {
        if (nn_errors[i] < epsilon * ntk_errors[i])
            result = m_grid[i];
        else
            break;
    }
    return result;
}

} // namespace fldiag
