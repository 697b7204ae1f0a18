// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fldiag/dataset.hpp"
#include "fldiag/kernel.hpp"
#include "fldiag/linalg.hpp"
#include "fldiag/network.hpp"

namespace fldiag {

struct FlGapResult {
    std::size_t m = 0;
    double nn_error = 0.0;
    double ntk_error = 0.0;
    double gap = 0.0; // ntk_error - nn_error
};

/// Empirical tangent kernel between two sample sets:
/// K[mu,nu] = <grad_theta f(x_mu), grad_theta f(x_nu)>, summed over output
/// units. Assembled per layer from activation and sensitivity Grams in
/// 256-sample blocks, never materializing the m x P Jacobian. The square
/// case is symmetrized to scrub roundoff asymmetry.
KernelMatrix empirical_ntk(const ModelState& state, const Matrix& xa, const Matrix& xb,
                           std::size_t block = 256);
/// Serial reference of the same blocked assembly (bit-identical result).
KernelMatrix empirical_ntk_serial(const ModelState& state, const Matrix& xa,
                                  const Matrix& xb, std::size_t block = 256);

/// Kernel ridge mean predictor: K_test_train (K_train + lambda I)^{-1} Y.
/// Without an explicit ridge, lambda = 1e-6 * tr(K_train) / m.
Matrix ntk_predict(const KernelMatrix& k_train, const Matrix& y,
                   const KernelMatrix& k_test_train,
                   std::optional<double> ridge = std::nullopt);

double default_ridge(const KernelMatrix& k_train);

/// Linearized model trained in its tangent feature space. Coefficients are
/// carried in the dual (alpha with theta - theta_0 = J^T alpha), which
/// reproduces full-batch gradient descent from theta_0 exactly while only
/// requiring kernel products. Scalar outputs only.
struct LinearizedPredictor {
    ModelState state0;
    Matrix train_x;
    Matrix alpha; // m x 1

    Matrix predict(const Matrix& x) const;
};

struct LinearizeConfig {
    std::size_t max_iters = 200000; // 0 trains nothing: predictor == f_theta0
    double tol = 1e-10;             // relative fit-residual stop
};

LinearizedPredictor linearize_and_train(const ModelState& state0, const Dataset& ds,
                                        const LinearizeConfig& cfg);

/// Per-eigenmode residual projections of kernel gradient flow started from
/// the zero function: p_k(t) = exp(-lambda_k t) <e_k, -Y>. One column per
/// target column; negative roundoff eigenvalues are treated as zero.
Matrix kernel_gradient_flow(const KernelMatrix& k, const Matrix& y, double t,
                            const Spectrum& spectrum);

/// Linear centered-kernel alignment in [0, 1]; 0 when either centered Gram
/// vanishes.
double cka(const KernelMatrix& k1, const KernelMatrix& k2);

/// S_NT = 1 - CKA between the tangent kernels of the two checkpoints on the
/// probe inputs.
double fl_strength_ntk(const ModelState& state0, const ModelState& state_t,
                       const Matrix& x_probe);

FlGapResult fl_gap(double nn_error, double ntk_error, std::size_t m = 0);

/// Smallest grid size from which nn/ntk stays below epsilon for the rest of
/// the grid; nullopt when the tail condition never holds.
std::optional<std::size_t> critical_m(const std::vector<std::size_t>& m_grid,
                                      const std::vector<double>& nn_errors,
                                      const std::vector<double>& ntk_errors,
                                      double epsilon);

} // namespace fldiag
