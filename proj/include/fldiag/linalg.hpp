// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fldiag/matrix.hpp"

namespace fldiag {

/// Descending eigenvalues with aligned orthonormal eigenvector columns.
struct Spectrum {
    std::vector<double> eigenvalues; // sorted non-increasing
    Matrix eigenvectors;             // column k pairs with eigenvalues[k]
};

namespace linalg {

// Every kernel below comes in an OpenMP-parallel flavor (the default name)
// and a *_serial reference. Both call the same per-row inner routine, so the
// parallel result is bit-identical to the serial one for any thread count.

/// C = A * B.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_serial(const Matrix& a, const Matrix& b);

/// C = A * B^T. The Gram workhorse: gram(X) == matmul_nt(X, X).
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_nt_serial(const Matrix& a, const Matrix& b);

/// C = A^T * B.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_tn_serial(const Matrix& a, const Matrix& b);

/// Symmetric eigendecomposition by Householder tridiagonalization plus
/// implicit-shift QL iteration; deterministic, eigenvalues descending.
/// Throws std::invalid_argument for non-square or asymmetric (beyond
/// 1e-8 * max(1, max|a|)) input and std::runtime_error on non-convergence.
Spectrum sym_eig(const Matrix& a);

/// Solve (k + ridge*I) x = y by Cholesky factorization, one column of y at a
/// time. Throws std::runtime_error if the shifted matrix is not positive
/// definite.
Matrix solve_spd(const Matrix& k, const Matrix& y, double ridge);

/// Thin Q from a Householder QR of g (rows >= cols); span(Q) == span(g).
/// Throws std::runtime_error on rank deficiency.
Matrix qr_orthonormal(const Matrix& g);

double dot(const double* a, const double* b, std::size_t n);

} // namespace linalg
} // namespace fldiag
