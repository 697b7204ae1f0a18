// SPDX-License-Identifier: Apache-2.0
#include "fldiag/matrix.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fldiag {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
        check(r.size() == m.cols_, "from_rows: ragged row");
        std::size_t j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Matrix::max_abs() const {
    double s = 0.0;
    for (double v : data_) s = std::max(s, std::fabs(v));
    return s;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix Matrix::take_rows(const std::vector<std::size_t>& idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        check(idx[i] < rows_, "take_rows: index out of range");
        std::memcpy(out.row(i), row(idx[i]), cols_ * sizeof(double));
    }
    return out;
}

std::vector<double> Matrix::col_vector(std::size_t j) const {
    check(j < cols_, "col_vector: index out of range");
    std::vector<double> v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

namespace {
constexpr char kMagic[4] = {'F', 'L', 'G', 'M'};

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
} // namespace

void save_matrix(const Matrix& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_matrix: cannot open " + path);
    os.write(kMagic, 4);
    write_u32(os, static_cast<std::uint32_t>(m.rows()));
    write_u32(os, static_cast<std::uint32_t>(m.cols()));
    // Doubles written verbatim; this code targets little-endian hosts.
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!os) throw std::runtime_error("save_matrix: write failed for " + path);
}

Matrix load_matrix(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_matrix: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("load_matrix: bad magic in " + path);
    std::uint32_t rows = read_u32(is);
    std::uint32_t cols = read_u32(is);
    Matrix m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!is) throw std::runtime_error("load_matrix: truncated payload in " + path);
    return m;
}

void save_matrix_csv(const Matrix& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_matrix_csv: cannot open " + path);
    char buf[64];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            os << buf << (j + 1 < m.cols() ? "," : "");
        }
        os << "\n";
    }
}

Matrix load_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_matrix_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("load_matrix_csv: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

} // namespace fldiag
