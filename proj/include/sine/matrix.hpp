#pragma once

// Dense row-major double matrix plus the handful of BLAS-like routines the
// model needs. Desk scale: clarity over speed, double precision throughout.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sine/error.hpp"
#include "sine/rng.hpp"

namespace sine {

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    std::size_t size() const { return data.size(); }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    void zero() { fill(0.0); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline void require_finite(const Matrix& m, const std::string& what) {
    if (!m.all_finite()) throw NumericError(what + " contains NaN/Inf");
}

inline void require_shape(const Matrix& m, int r, int c, const std::string& what) {
    if (m.rows != r || m.cols != c)
        throw ContractError(what + ": expected " + std::to_string(r) + "x" + std::to_string(c) +
                            ", got " + std::to_string(m.rows) + "x" + std::to_string(m.cols));
}

// out = a * b
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ContractError("matmul: inner dimensions differ");
    Matrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

// out = a^T * b
inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw ContractError("matmul_at_b: row counts differ");
    Matrix out(a.cols, b.cols);
    for (int k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (int i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* orow = out.row(i);
            for (int j = 0; j < b.cols; ++j) orow[j] += aki * brow[j];
        }
    }
    return out;
}

// out = a * b^T
inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw ContractError("matmul_a_bt: column counts differ");
    Matrix out(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            out.at(i, j) = s;
        }
    }
    return out;
}

inline void add_inplace(Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ContractError("add_inplace: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += b.data[i];
}

inline void axpy_inplace(Matrix& a, double s, const Matrix& b) {
    if (!a.same_shape(b)) throw ContractError("axpy_inplace: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += s * b.data[i];
}

inline void scale_inplace(Matrix& a, double s) {
    for (double& v : a.data) v *= s;
}

inline double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline Matrix uniform_init(int rows, int cols, double scale, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform_range(-scale, scale);
    return m;
}

}  // namespace sine
