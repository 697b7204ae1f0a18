// SPDX-License-Identifier: Apache-2.0
#include "fldiag/superposition.hpp"

#include <cmath>

#include "fldiag/linalg.hpp"

namespace fldiag {

namespace {

/// Shared kernel: one row per vector.
std::vector<double> dimensionality_of_rows(const Matrix& vectors) {
    const std::size_t n = vectors.rows();
    const std::size_t dim = vectors.cols();
    std::vector<double> norms2(n);
    for (std::size_t i = 0; i < n; ++i)
        norms2[i] = linalg::dot(vectors.row(i), vectors.row(i), dim);

    std::vector<double> out(n, 0.0);
    const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < nn; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        if (norms2[i] == 0.0) continue; // zero vectors report D = 0
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double d = linalg::dot(vectors.row(i), vectors.row(j), dim);
            denom += d * d;
        }
        // (What_i . W_j)^2 = (W_i . W_j)^2 / |W_i|^2
        out[i] = norms2[i] * norms2[i] / denom;
    }
    return out;
}

} // namespace

std::vector<double> feature_dimensionality(const Matrix& w, FeatureAxis axis) {
    check(w.rows() > 0 && w.cols() > 0, "feature_dimensionality: empty matrix");
    if (axis == FeatureAxis::Rows) return dimensionality_of_rows(w);
    return dimensionality_of_rows(w.transposed());
}

std::vector<double> sample_dimensionality(const Matrix& features) {
    check(features.rows() > 0 && features.cols() > 0,
          "sample_dimensionality: empty input");
    return dimensionality_of_rows(features);
}

Histogram dim_histogram(const std::vector<double>& values, std::size_t n_bins) {
    check(n_bins >= 1, "dim_histogram: need at least one bin");
    Histogram h;
    h.edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b)
        h.edges[b] = static_cast<double>(b) / static_cast<double>(n_bins);
    h.counts.assign(n_bins, 0);
    for (double v : values) {
        double clamped = std::min(1.0, std::max(0.0, v));
        std::size_t bin = static_cast<std::size_t>(clamped * static_cast<double>(n_bins));
        if (bin >= n_bins) bin = n_bins - 1;
        ++h.counts[bin];
    }
    return h;
}

double zero_fraction(const std::vector<double>& values, double tol) {
    check(tol >= 0.0, "zero_fraction: tol must be >= 0");
    if (values.empty()) return 0.0;
    std::size_t count = 0;
    for (double v : values)
        if (v <= tol) ++count;
    return static_cast<double>(count) / static_cast<double>(values.size());
}

} // namespace fldiag
