// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fldiag {

/// Dense row-major matrix of doubles. The single array type passed between
/// modules; vectors are 1-column or 1-row matrices by convention.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

    Matrix transposed() const;

    /// Frobenius norm.
    double frobenius_norm() const;
    /// Largest absolute entry, 0 for empty.
    double max_abs() const;
    /// All entries finite?
    bool all_finite() const;

    /// Extract a subset of rows (in the given order).
    Matrix take_rows(const std::vector<std::size_t>& idx) const;

    std::vector<double> col_vector(std::size_t j) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Binary matrix file: "FLGM" magic, u32 rows, u32 cols, little-endian f64
/// row-major payload.
void save_matrix(const Matrix& m, const std::string& path);
Matrix load_matrix(const std::string& path);

/// CSV export for small matrices (one row per line, %.17g so values
/// round-trip exactly).
void save_matrix_csv(const Matrix& m, const std::string& path);
Matrix load_matrix_csv(const std::string& path);

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace fldiag
