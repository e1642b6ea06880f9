#pragma once

// Differentiable primitives: row softmax, layer normalization, logistic, GELU,
// affine maps. Forward ops validate finiteness; backward passes are
// hand-derived and guarded by the finite-difference checker in the tests.

#include <cmath>
#include <limits>

#include "sine/matrix.hpp"

namespace sine {

// ---------------------------------------------------------------------------
// scalar activations

// Numerically safe sigmoid: saturates instead of overflowing.
inline double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logistic_grad(double sigma) { return sigma * (1.0 - sigma); }

// -ln sigmoid(x), computed as softplus(-x) so large |x| cannot produce NaN.
inline double neg_log_sigmoid(double x) {
    if (x >= 0.0) return std::log1p(std::exp(-x));
    return -x + std::log1p(std::exp(x));
}

// Smooth FFN nonlinearity (exact erf form). Smoothness matters: the training
// graph is checked against central finite differences, which a ReLU kink
// breaks.
inline double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x * 0.70710678118654752440));
}

inline double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * 0.70710678118654752440));
    const double pdf = 0.39894228040143267794 * std::exp(-0.5 * x * x);
    return cdf + x * pdf;
}

// ---------------------------------------------------------------------------
// softmax over rows

// Per-row max subtraction; -inf logits (masked positions) map to weight 0.
inline Matrix softmax_rows(const Matrix& m) {
    Matrix out(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i) {
        const double* in = m.row(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < m.cols; ++j) {
            if (std::isnan(in[j])) throw NumericError("softmax_rows: NaN input");
            if (in[j] > mx) mx = in[j];
        }
        if (mx == -std::numeric_limits<double>::infinity())
            throw NumericError("softmax_rows: fully masked row");
        double* o = out.row(i);
        double sum = 0.0;
        for (int j = 0; j < m.cols; ++j) {
            o[j] = std::exp(in[j] - mx);
            sum += o[j];
        }
        for (int j = 0; j < m.cols; ++j) o[j] /= sum;
    }
    return out;
}

// Backward through y = softmax(x) per row: dx = y .* (dy - <dy, y>).
inline Matrix softmax_rows_backward(const Matrix& y, const Matrix& dy) {
    if (!y.same_shape(dy)) throw ContractError("softmax_rows_backward: shape mismatch");
    Matrix dx(y.rows, y.cols);
    for (int i = 0; i < y.rows; ++i) {
        const double* yr = y.row(i);
        const double* dyr = dy.row(i);
        double inner = 0.0;
        for (int j = 0; j < y.cols; ++j) inner += yr[j] * dyr[j];
        double* dxr = dx.row(i);
        for (int j = 0; j < y.cols; ++j) dxr[j] = yr[j] * (dyr[j] - inner);
    }
    return dx;
}

// ---------------------------------------------------------------------------
// layer normalization (population variance + eps, per row)

struct LayerNormCache {
    Matrix xhat;               // normalized rows before gain/bias
    std::vector<double> inv_std;
};

inline Matrix layer_norm_fwd(const Matrix& m, const Matrix& gain, const Matrix& bias,
                             double eps, LayerNormCache* cache) {
    if (m.cols < 2) throw ContractError("layer_norm: needs at least 2 columns");
    require_shape(gain, 1, m.cols, "layer_norm gain");
    require_shape(bias, 1, m.cols, "layer_norm bias");
    if (eps <= 0.0) throw NumericError("layer_norm: eps must be positive");
    Matrix out(m.rows, m.cols);
    if (cache) {
        cache->xhat = Matrix(m.rows, m.cols);
        cache->inv_std.assign(m.rows, 0.0);
    }
    for (int i = 0; i < m.rows; ++i) {
        const double* x = m.row(i);
        double mean = 0.0;
        for (int j = 0; j < m.cols; ++j) mean += x[j];
        mean /= m.cols;
        double var = 0.0;
        for (int j = 0; j < m.cols; ++j) {
            const double d = x[j] - mean;
            var += d * d;
        }
        var /= m.cols;
        const double inv_std = 1.0 / std::sqrt(var + eps);
        double* o = out.row(i);
        for (int j = 0; j < m.cols; ++j) {
            const double xh = (x[j] - mean) * inv_std;
            o[j] = gain.data[j] * xh + bias.data[j];
            if (cache) cache->xhat.at(i, j) = xh;
        }
        if (cache) cache->inv_std[i] = inv_std;
    }
    return out;
}

inline Matrix layer_norm(const Matrix& m, const Matrix& gain, const Matrix& bias,
                         double eps = 1e-8) {
    return layer_norm_fwd(m, gain, bias, eps, nullptr);
}

// Backward through y = gain .* xhat + bias. Accumulates into dgain/dbias.
inline Matrix layer_norm_bwd(const Matrix& dout, const LayerNormCache& cache,
                             const Matrix& gain, Matrix& dgain, Matrix& dbias) {
    const int rows = dout.rows, cols = dout.cols;
    Matrix dx(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const double* dy = dout.row(i);
        const double* xh = cache.xhat.row(i);
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        for (int j = 0; j < cols; ++j) {
            dgain.data[j] += dy[j] * xh[j];
            dbias.data[j] += dy[j];
            const double dxhat = dy[j] * gain.data[j];
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xh[j];
        }
        const double inv_n = 1.0 / cols;
        for (int j = 0; j < cols; ++j) {
            const double dxhat = dy[j] * gain.data[j];
            dx.at(i, j) = cache.inv_std[i] *
                          (dxhat - inv_n * sum_dxhat - xh[j] * inv_n * sum_dxhat_xhat);
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// affine row map: out = x * w + b (b broadcast over rows)

inline Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
    Matrix out = matmul(x, w);
    require_shape(b, 1, w.cols, "affine bias");
    for (int i = 0; i < out.rows; ++i) {
        double* o = out.row(i);
        for (int j = 0; j < out.cols; ++j) o[j] += b.data[j];
    }
    return out;
}

// dx = dout * w^T; accumulates dw += x^T * dout, db += column sums of dout.
inline Matrix affine_bwd(const Matrix& dout, const Matrix& x, const Matrix& w,
                         Matrix& dw, Matrix& db) {
    add_inplace(dw, matmul_at_b(x, dout));
    for (int i = 0; i < dout.rows; ++i) {
        const double* d = dout.row(i);
        for (int j = 0; j < dout.cols; ++j) db.data[j] += d[j];
    }
    return matmul_a_bt(dout, w);
}

}  // namespace sine
