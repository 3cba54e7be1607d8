#include "rarecast/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "rarecast/kernels.hpp"

namespace rarecast::num {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values)
    : rows_(rows), cols_(cols), data_(values) {
    if (data_.size() != rows * cols) {
        throw std::runtime_error("Matrix init list has " + std::to_string(data_.size()) +
                                 " values for shape " + shape_str());
    }
}

Matrix Matrix::filled(std::size_t rows, std::size_t cols, double value) {
    Matrix m(rows, cols);
    for (double& x : m.data_) x = value;
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::ensure_finite(const std::string& context) const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            throw std::runtime_error("non-finite value in " + context + " at flat index " +
                                     std::to_string(i));
        }
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw std::runtime_error("matmul shape mismatch: " + a.shape_str() + " * " +
                                 b.shape_str());
    }
    Matrix c(a.rows(), b.cols());
    kernels::active().matmul_acc(c.data(), a.data(), b.data(), a.rows(), a.cols(),
                                 b.cols());
    return c;
}

Matrix activate(const Matrix& x, Activation kind) {
    Matrix y(x.rows(), x.cols());
    switch (kind) {
        case Activation::relu:
            kernels::active().relu(y.data(), x.data(), x.size());
            break;
        case Activation::sigmoid:
            for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = sigmoid(x.data()[i]);
            break;
        case Activation::tanh:
            for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = std::tanh(x.data()[i]);
            break;
    }
    return y;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace rarecast::num
