// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fldiag/matrix.hpp"

namespace fldiag {

enum class FeatureAxis { Columns, Rows };

/// Inverse-participation dimensionality per feature vector of a weight
/// matrix: D_i = |W_i|^2 / sum_j (What_i . W_j)^2. Columns (input directions
/// into the layer) by default; zero vectors report D = 0.
std::vector<double> feature_dimensionality(const Matrix& w,
                                           FeatureAxis axis = FeatureAxis::Columns);

/// Same functional across sample rows of a feature-map matrix.
std::vector<double> sample_dimensionality(const Matrix& features);

struct Histogram {
    std::vector<double> edges;      // n_bins + 1 uniform edges over [0, 1]
    std::vector<std::size_t> counts;
};

/// Uniform bins over [0, 1]; values outside are clamped to the end bins.
Histogram dim_histogram(const std::vector<double>& values, std::size_t n_bins);

/// Fraction of values <= tol.
double zero_fraction(const std::vector<double>& values, double tol);

} // namespace fldiag
