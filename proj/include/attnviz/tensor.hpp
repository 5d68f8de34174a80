// SPDX-License-Identifier: Apache-2.0
//
// Dense kernels for the toy engine. Storage is double; weights coming from
// model files are float32 values widened on load.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace attnviz {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    // Throws a shape error unless values.size() == rows * cols.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    std::string shape_string() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

// Adds `bias` to every row in place.
void add_row_bias(Matrix& m, std::span<const double> bias);

/// Numerically stable softmax (max-subtracted). Throws a domain error on an
/// empty or non-finite input.
Vector softmax(std::span<const double> v);

/// gamma * (v - mean) / sqrt(var + eps) + beta with population variance.
Vector layer_norm(std::span<const double> v, std::span<const double> gamma,
                  std::span<const double> beta, double eps = 1e-5);

/// tanh approximation: 0.5 x (1 + tanh(0.7978845608 (x + 0.044715 x^3))).
double gelu(double x);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace attnviz
