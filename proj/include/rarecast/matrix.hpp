#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace rarecast::num {

/// Dense row-major matrix of 64-bit reals. The single numeric carrier for
/// model parameters, activations and gradients.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

    static Matrix filled(std::size_t rows, std::size_t cols, double value);
    static Matrix identity(std::size_t n);

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::string shape_str() const;

    /// Throws std::runtime_error naming `context` if any entry is NaN/Inf.
    void ensure_finite(const std::string& context) const;

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class Activation { sigmoid, tanh, relu };

/// C = A * B with a fixed accumulation order (ascending inner index).
/// Repeated calls with identical inputs are bit-identical.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Elementwise activation; shape-preserving.
Matrix activate(const Matrix& x, Activation kind);

double sigmoid(double x);
double relu(double x);

}  // namespace rarecast::num
