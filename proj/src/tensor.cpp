// SPDX-License-Identifier: Apache-2.0
#include "attnviz/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "attnviz/error.hpp"

namespace attnviz {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorKind::Data, std::string(what) + ": non-finite value");
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw Error(ErrorKind::Shape, "matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                                          " given " + std::to_string(values_.size()) + " values");
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string Matrix::shape_string() const {
    return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw Error(ErrorKind::Shape,
                    "matmul shape mismatch: " + a.shape_string() + " x " + b.shape_string());
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * brow[j];
        }
    }
    require_finite(out.values(), "matmul");
    return out;
}

void add_row_bias(Matrix& m, std::span<const double> bias) {
    if (bias.size() != m.cols()) {
        throw Error(ErrorKind::Shape, "bias of length " + std::to_string(bias.size()) +
                                          " for matrix " + m.shape_string());
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
    }
}

Vector softmax(std::span<const double> v) {
    if (v.empty()) throw Error(ErrorKind::Domain, "softmax of an empty vector");
    require_finite(v, "softmax");
    const double mx = *std::max_element(v.begin(), v.end());
    Vector out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

Vector layer_norm(std::span<const double> v, std::span<const double> gamma,
                  std::span<const double> beta, double eps) {
    if (gamma.size() != v.size() || beta.size() != v.size()) {
        throw Error(ErrorKind::Shape, "layer_norm: input " + std::to_string(v.size()) + ", gamma " +
                                          std::to_string(gamma.size()) + ", beta " +
                                          std::to_string(beta.size()));
    }
    if (!(eps > 0.0)) throw Error(ErrorKind::Domain, "layer_norm: eps must be positive");
    if (v.empty()) return {};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    const double inv = 1.0 / std::sqrt(var + eps);
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = gamma[i] * (v[i] - mean) * inv + beta[i];
    return out;
}

double gelu(double x) {
    constexpr double kSqrt2OverPi = 0.7978845608;
    constexpr double kCubic = 0.044715;
    return 0.5 * x * (1.0 + std::tanh(kSqrt2OverPi * (x + kCubic * x * x * x)));
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::Shape, "dot of lengths " + std::to_string(a.size()) + " and " +
                                          std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace attnviz
