// SPDX-License-Identifier: Apache-2.0
#include "fldiag/ck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fldiag {

KernelMatrix ck_matrix(const ModelState& state, const Matrix& x, std::size_t layer) {
    Matrix phi = feature_map(state, x, layer);
    KernelMatrix k;
    k.entries = linalg::matmul_nt(phi, phi);
    k.provenance = "ck layer " + std::to_string(layer);
    return k;
}

UtilityProfile feature_utilities(const Spectrum& spectrum,
                                 const std::vector<double>& f_values,
                                 std::size_t n_features, double threshold) {
    const std::size_t n = spectrum.eigenvalues.size();
    check(f_values.size() == n, "feature_utilities: f sampled on wrong point count");
    check(n_features >= 1, "feature_utilities: need at least one feature");
    n_features = std::min(n_features, n);

    std::vector<double> proj_sq(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double p = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            p += spectrum.eigenvectors(i, k) * f_values[i];
        proj_sq[k] = p * p;
    }

    // Reorder inside groups of numerically tied eigenvalues by descending
    // squared projection, then index.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const double scale = n ? std::max(std::fabs(spectrum.eigenvalues.front()),
                                      std::fabs(spectrum.eigenvalues.back()))
                           : 0.0;
    const double tie_tol = 1e-12 * std::max(1.0, scale);
    std::size_t group_start = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        const bool boundary =
            k == n || std::fabs(spectrum.eigenvalues[k] -
                                spectrum.eigenvalues[group_start]) > tie_tol;
        if (boundary) {
            std::sort(order.begin() + group_start, order.begin() + k,
                      [&](std::size_t a, std::size_t b) {
                          if (proj_sq[a] != proj_sq[b]) return proj_sq[a] > proj_sq[b];
                          return a < b;
                      });
            group_start = k;
        }
    }

    UtilityProfile profile;
    profile.threshold = threshold;
    double in_span = 0.0;
    for (std::size_t k = 0; k < n_features; ++k) in_span += proj_sq[order[k]];
    double f_norm2 = 0.0;
    for (double v : f_values) f_norm2 += v * v;
    profile.projected_fraction = f_norm2 > 0.0 ? in_span / f_norm2 : 0.0;

    if (in_span <= 0.0) {
        profile.degenerate = true;
        return profile;
    }

    profile.utilities.resize(n_features);
    profile.cumulative.resize(n_features);
    double running = 0.0;
    for (std::size_t k = 0; k < n_features; ++k) {
        profile.utilities[k] = proj_sq[order[k]] / in_span;
        running += profile.utilities[k];
        profile.cumulative[k] = running;
    }
    profile.strength = fl_strength_ck(profile);
    return profile;
}

UtilityProfile target_utilities(const Spectrum& spectrum,
                                const std::vector<double>& target_values,
                                std::size_t n_features, double threshold) {
    return feature_utilities(spectrum, target_values, n_features, threshold);
}

std::size_t fl_strength_ck(const UtilityProfile& profile) {
    check(!profile.degenerate, "fl_strength_ck: degenerate profile");
    check(!profile.cumulative.empty(), "fl_strength_ck: empty profile");
    for (std::size_t k = 0; k < profile.cumulative.size(); ++k)
        if (profile.cumulative[k] > profile.threshold) return k + 1;
    return profile.cumulative.size();
}

CumulativePower cumulative_power(const Spectrum& kernel_spectrum,
                                 const std::vector<double>& target_values) {
    const std::size_t n = kernel_spectrum.eigenvalues.size();
    check(target_values.size() == n,
          "cumulative_power: target sampled on wrong point count");
    double trace = 0.0;
    for (double v : kernel_spectrum.eigenvalues) trace += std::max(v, 0.0);
    const double cutoff = 1e-12 * trace;

    CumulativePower cp;
    double denom = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double eta = kernel_spectrum.eigenvalues[k];
        if (eta <= cutoff) continue;
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            w += kernel_spectrum.eigenvectors(i, k) * target_values[i];
        cp.eigenvalues.push_back(eta);
        cp.coefficients.push_back(w);
        denom += eta * w * w;
    }
    if (denom <= 0.0)
        throw std::runtime_error("cumulative_power: target has no power on the kernel");

    cp.curve.resize(cp.eigenvalues.size());
    double running = 0.0;
    for (std::size_t k = 0; k < cp.eigenvalues.size(); ++k) {
        running += cp.eigenvalues[k] * cp.coefficients[k] * cp.coefficients[k];
        cp.curve[k] = running / denom;
    }
    return cp;
}

} // namespace fldiag
