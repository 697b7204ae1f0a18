// SPDX-License-Identifier: Apache-2.0
#include "fldiag/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fldiag::linalg {

namespace {

// Per-row inner routines shared by the serial and parallel entry points.
// Keeping one compiled body per routine guarantees bit-identical results.

inline void matmul_row(const double* __restrict a_row, const Matrix& b,
                       double* __restrict c_row, std::size_t k_dim, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) c_row[j] = 0.0;
    for (std::size_t k = 0; k < k_dim; ++k) {
        const double aik = a_row[k];
        const double* __restrict b_row = b.row(k);
        for (std::size_t j = 0; j < n; ++j) c_row[j] += aik * b_row[j];
    }
}

inline void matmul_nt_row(const double* __restrict a_row, const Matrix& b,
                          double* __restrict c_row, std::size_t k_dim, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) c_row[j] = dot(a_row, b.row(j), k_dim);
}

inline void matmul_tn_row(const Matrix& a, std::size_t i, const Matrix& b,
                          double* __restrict c_row, std::size_t k_dim, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) c_row[j] = 0.0;
    for (std::size_t k = 0; k < k_dim; ++k) {
        const double aki = a(k, i);
        const double* __restrict b_row = b.row(k);
        for (std::size_t j = 0; j < n; ++j) c_row[j] += aki * b_row[j];
    }
}

} // namespace

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.rows(), "matmul: dimension mismatch");
    Matrix c(a.rows(), b.cols());
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i)
        matmul_row(a.row(i), b, c.row(i), a.cols(), b.cols());
    return c;
}

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.rows(), "matmul: dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        matmul_row(a.row(i), b, c.row(i), a.cols(), b.cols());
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.cols(), "matmul_nt: dimension mismatch");
    Matrix c(a.rows(), b.rows());
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i)
        matmul_nt_row(a.row(i), b, c.row(i), a.cols(), b.rows());
    return c;
}

Matrix matmul_nt_serial(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.cols(), "matmul_nt: dimension mismatch");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        matmul_nt_row(a.row(i), b, c.row(i), a.cols(), b.rows());
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check(a.rows() == b.rows(), "matmul_tn: dimension mismatch");
    Matrix c(a.cols(), b.cols());
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(a.cols());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i)
        matmul_tn_row(a, static_cast<std::size_t>(i), b, c.row(i), a.rows(), b.cols());
    return c;
}

Matrix matmul_tn_serial(const Matrix& a, const Matrix& b) {
    check(a.rows() == b.rows(), "matmul_tn: dimension mismatch");
    Matrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i)
        matmul_tn_row(a, i, b, c.row(i), a.rows(), b.cols());
    return c;
}

namespace {

// Householder reduction to tridiagonal form with accumulation of the
// orthogonal transform, followed by implicit-shift QL iteration on the
// tridiagonal matrix. Classic dense-path algorithms; no randomization.

void tridiagonalize(Matrix& a, std::vector<double>& d, std::vector<double>& e) {
    const std::size_t n = a.rows();
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    for (std::size_t i = n - 1; i >= 1; --i) {
        const std::size_t l = i - 1;
        double h = 0.0;
        if (i > 1) {
            double scale = 0.0;
            for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(a(i, k));
            if (scale == 0.0) {
                e[i] = a(i, l);
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                const std::ptrdiff_t lim = static_cast<std::ptrdiff_t>(l);
#pragma omp parallel for schedule(static)
                for (std::ptrdiff_t jj = 0; jj <= lim; ++jj) {
                    const std::size_t j = static_cast<std::size_t>(jj);
                    a(j, i) = a(i, j) / h;
                    double g2 = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) g2 += a(j, k) * a(i, k);
                    for (std::size_t k = j + 1; k <= l; ++k) g2 += a(k, j) * a(i, k);
                    e[j] = g2 / h;
                }
                for (std::size_t j = 0; j <= l; ++j) f += e[j] * a(i, j);
                const double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) e[j] -= hh * a(i, j);
#pragma omp parallel for schedule(static)
                for (std::ptrdiff_t jj = 0; jj <= lim; ++jj) {
                    const std::size_t j = static_cast<std::size_t>(jj);
                    const double fj = a(i, j);
                    const double gj = e[j];
                    for (std::size_t k = 0; k <= j; ++k)
                        a(j, k) -= fj * e[k] + gj * a(i, k);
                }
            }
        } else {
            e[i] = a(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    // Accumulate the transformation in place.
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t l = i; // columns 0..i-1 already hold the transform
        if (d[i] != 0.0) {
            const std::ptrdiff_t lim = static_cast<std::ptrdiff_t>(l);
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t jj = 0; jj < lim; ++jj) {
                const std::size_t j = static_cast<std::size_t>(jj);
                double g = 0.0;
                for (std::size_t k = 0; k < l; ++k) g += a(i, k) * a(k, j);
                for (std::size_t k = 0; k < l; ++k) a(k, j) -= g * a(k, i);
            }
        }
        d[i] = a(i, i);
        a(i, i) = 1.0;
        for (std::size_t j = 0; j < l; ++j) a(j, i) = a(i, j) = 0.0;
    }
}

inline double hypot2(double a, double b) {
    return std::sqrt(a * a + b * b);
}

void ql_implicit(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
    const std::size_t n = d.size();
    if (n == 0) return;
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (++iter == 50)
                    throw std::runtime_error("sym_eig: QL iteration failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = hypot2(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = hypot2(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
                    const std::size_t col = i;
#pragma omp parallel for schedule(static)
                    for (std::ptrdiff_t kk = 0; kk < nn; ++kk) {
                        const std::size_t k = static_cast<std::size_t>(kk);
                        double zk1 = z(k, col + 1);
                        z(k, col + 1) = s * z(k, col) + c * zk1;
                        z(k, col) = c * z(k, col) - s * zk1;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace

Spectrum sym_eig(const Matrix& a) {
    check(a.rows() == a.cols(), "sym_eig: matrix must be square");
    const std::size_t n = a.rows();
    const double tol = 1e-8 * std::max(1.0, a.max_abs());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::fabs(a(i, j) - a(j, i)) > tol)
                throw std::invalid_argument("sym_eig: matrix not symmetric");

    Spectrum s;
    if (n == 0) return s;
    // Work on the symmetrized copy so roundoff asymmetry cannot leak in.
    Matrix z(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) z(i, j) = 0.5 * (a(i, j) + a(j, i));

    std::vector<double> d, e;
    if (n == 1) {
        d = {z(0, 0)};
        z(0, 0) = 1.0;
    } else {
        tridiagonalize(z, d, e);
        ql_implicit(d, e, z);
    }

    // Sort descending; stable order on exact eigenvalue ties.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return d[x] > d[y]; });
    s.eigenvalues.resize(n);
    s.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        s.eigenvalues[k] = d[order[k]];
        for (std::size_t i = 0; i < n; ++i) s.eigenvectors(i, k) = z(i, order[k]);
    }
    return s;
}

Matrix solve_spd(const Matrix& k, const Matrix& y, double ridge) {
    check(k.rows() == k.cols(), "solve_spd: matrix must be square");
    check(k.rows() == y.rows(), "solve_spd: rhs row count mismatch");
    check(ridge >= 0.0, "solve_spd: ridge must be >= 0");
    const std::size_t n = k.rows();

    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            l(i, j) = 0.5 * (k(i, j) + k(j, i)) + (i == j ? ridge : 0.0);

    // In-place Cholesky on the lower triangle (right-looking).
    for (std::size_t j = 0; j < n; ++j) {
        double diag = l(j, j) - dot(l.row(j), l.row(j), j);
        if (!(diag > 0.0))
            throw std::runtime_error("solve_spd: matrix not positive definite");
        diag = std::sqrt(diag);
        l(j, j) = diag;
        const std::ptrdiff_t lim = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(j) + 1; ii < lim; ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            l(i, j) = (l(i, j) - dot(l.row(i), l.row(j), j)) / diag;
        }
    }

    Matrix x = y;
    // Forward and back substitution per column.
    for (std::size_t c = 0; c < y.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, c);
            for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * x(j, c);
            x(i, c) = s / l(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = x(i, c);
            for (std::size_t j = i + 1; j < n; ++j) s -= l(j, i) * x(j, c);
            x(i, c) = s / l(i, i);
        }
    }
    return x;
}

Matrix qr_orthonormal(const Matrix& g) {
    check(g.rows() >= g.cols(), "qr_orthonormal: need rows >= cols");
    const std::size_t m = g.rows(), n = g.cols();
    Matrix r = g;
    std::vector<std::vector<double>> reflectors;
    reflectors.reserve(n);
    const double rank_tol = 1e-12 * std::max(1.0, g.max_abs()) * static_cast<double>(m);

    for (std::size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < m; ++i) norm += r(i, j) * r(i, j);
        norm = std::sqrt(norm);
        if (norm <= rank_tol)
            throw std::runtime_error("qr_orthonormal: rank-deficient input");
        std::vector<double> v(m, 0.0);
        const double alpha = (r(j, j) >= 0.0) ? -norm : norm;
        for (std::size_t i = j; i < m; ++i) v[i] = r(i, j);
        v[j] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = j; i < m; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 > 0.0) {
            for (std::size_t c = j; c < n; ++c) {
                double proj = 0.0;
                for (std::size_t i = j; i < m; ++i) proj += v[i] * r(i, c);
                proj = 2.0 * proj / vnorm2;
                for (std::size_t i = j; i < m; ++i) r(i, c) -= proj * v[i];
            }
        }
        reflectors.push_back(std::move(v));
    }

    // Apply the reflectors in reverse to the first n columns of I.
    Matrix q(m, n);
    for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
    for (std::size_t j = n; j-- > 0;) {
        const auto& v = reflectors[j];
        double vnorm2 = 0.0;
        for (std::size_t i = j; i < m; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) continue;
        for (std::size_t c = 0; c < n; ++c) {
            double proj = 0.0;
            for (std::size_t i = j; i < m; ++i) proj += v[i] * q(i, c);
            proj = 2.0 * proj / vnorm2;
            for (std::size_t i = j; i < m; ++i) q(i, c) -= proj * v[i];
        }
    }
    return q;
}

} // namespace fldiag::linalg
