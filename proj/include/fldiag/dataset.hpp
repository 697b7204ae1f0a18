// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fldiag/matrix.hpp"
#include "fldiag/rng.hpp"

namespace fldiag {

/// Boolean target on {-1,+1}^d given by a sparse Fourier-Walsh expansion:
/// f(z) = sum_S coeff(S) * prod_{i in S} z_i.
struct MspSpec {
    std::size_t input_dim = 0;
    std::vector<std::vector<int>> sets;
    std::vector<double> coefficients; // empty means all ones

    void validate() const;
    double coefficient(std::size_t i) const {
        return coefficients.empty() ? 1.0 : coefficients[i];
    }

    /// The 8-set size-30 instance used throughout the experiment configs.
    static MspSpec paper_default();
};

/// Random polynomial of total degree <= max_degree in r latent directions
/// obtained by orthonormalizing a Gaussian d x r matrix.
struct MultiIndexSpec {
    std::size_t input_dim = 0;  // d
    std::size_t latent_dim = 0; // r
    std::size_t max_degree = 1; // p
    double noise_std = 0.0;     // symmetric binary noise amplitude
    std::uint64_t seed = 0;     // fixes the projection and the coefficients

    void validate() const;
};

struct LabelStats {
    double mean = 0.0;
    double std_dev = 1.0;
};

struct DatasetMeta {
    std::string generator; // "msp" | "multi_index" | "external"
    std::uint64_t seed = 0;
    bool shuffled = false;
    LabelStats normalization;                  // identity unless normalized
    std::vector<std::size_t> permutation;      // set when shuffled
    std::optional<MspSpec> msp;
    std::optional<MultiIndexSpec> multi_index;
};

struct Dataset {
    Matrix X; // m x d
    Matrix Y; // m x n_L
    DatasetMeta meta;

    std::size_t size() const { return X.rows(); }
};

/// True iff some ordering of the sets introduces at least one index not
/// covered by the preceding sets. Backtracking over orderings with
/// covered-set memoization on the used-set mask.
bool msp_check(const std::vector<std::vector<int>>& sets);

/// Evaluate the Fourier-Walsh expansion at z (entries must be +/-1).
double msp_eval(const MspSpec& spec, const std::vector<double>& z);

/// m rows uniform on {-1,+1}^d with labels from msp_eval. Deterministic per
/// seed; the X stream is independent of any other tagged stream of `seed`.
Dataset gen_msp(const MspSpec& spec, std::size_t m, std::uint64_t seed);

/// Multi-index dataset: X ~ N(0, I_d), y = f(x) + eps, then labels
/// normalized. When `stats` is empty the dataset's own label statistics are
/// used (training set); pass the training stats to build a test set.
Dataset gen_multi_index(const MultiIndexSpec& spec, std::size_t m, std::uint64_t seed,
                        std::optional<LabelStats> stats = std::nullopt);

/// Uniformly permute the label rows; X untouched, permutation recorded.
Dataset shuffle_labels(const Dataset& ds, std::uint64_t seed);

/// Directory layout: meta.toml + X.bin + Y.bin (binary matrix format).
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);
void export_dataset_csv(const Dataset& ds, const std::string& dir);

/// Orthonormal projection and polynomial coefficients backing a
/// MultiIndexSpec; exposed for tests and for evaluating f* off-sample.
struct MultiIndexTarget {
    Matrix projection;                       // d x r, orthonormal columns
    std::vector<std::vector<int>> exponents; // all alpha with 1 <= |alpha| <= p
    std::vector<double> coefficients;        // c_alpha ~ N(0,1)

    double eval(const double* x, std::size_t d) const;
};
MultiIndexTarget build_multi_index_target(const MultiIndexSpec& spec);

} // namespace fldiag
