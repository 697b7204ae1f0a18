// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fldiag/kernel.hpp"
#include "fldiag/linalg.hpp"
#include "fldiag/network.hpp"

namespace fldiag {

/// Eigen-utility profile of a function against a kernel spectrum. Utilities
/// are normalized so the cumulative sum over the feature budget reaches 1;
/// `projected_fraction` reports the unnormalized share of |f|^2 captured by
/// those modes (it differs from 1 when part of f lies outside the span).
struct UtilityProfile {
    std::vector<double> utilities;  // Q_k, descending eigenvalue order
    std::vector<double> cumulative; // Pi(k) = sum_{j<=k} Q_j
    double threshold = 0.95;
    std::size_t strength = 0; // min k with Pi(k) > threshold (1-based)
    double projected_fraction = 1.0;
    bool degenerate = false; // f orthogonal to the retained modes
};

struct CumulativePower {
    std::vector<double> eigenvalues;   // modes with eta > 1e-12 * trace
    std::vector<double> coefficients;  // w_k = <e_k, target>
    std::vector<double> curve;         // C(rho), non-decreasing to 1
};

/// Layer feature Gram over X: feature_map(l) * feature_map(l)^T.
KernelMatrix ck_matrix(const ModelState& state, const Matrix& x, std::size_t layer);

/// Utilities of f against the top `n_features` modes of the spectrum.
/// Within groups of numerically tied eigenvalues, modes are reordered by
/// descending squared projection (then original index).
UtilityProfile feature_utilities(const Spectrum& spectrum,
                                 const std::vector<double>& f_values,
                                 std::size_t n_features, double threshold = 0.95);

/// Same computation with the target function in place of the learned one.
UtilityProfile target_utilities(const Spectrum& spectrum,
                                const std::vector<double>& target_values,
                                std::size_t n_features, double threshold = 0.95);

/// Smallest k whose cumulative utility clears the profile threshold.
std::size_t fl_strength_ck(const UtilityProfile& profile);

/// C(rho) = sum_{k<=rho} eta_k w_k^2 / sum_k eta_k w_k^2 over the retained
/// modes. Throws when the denominator vanishes.
CumulativePower cumulative_power(const Spectrum& kernel_spectrum,
                                 const std::vector<double>& target_values);

} // namespace fldiag
