#include "rarecast/kernels.hpp"

#include <cmath>

// Reference kernels. The AVX2 variants in kernels_avx2.cpp mirror the
// per-element operation order of this file exactly; equivalence tests
// assert bitwise agreement between the two tables.

namespace rarecast::num::kernels {
namespace {

void axpy_scalar(double* y, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_scalar(double* z, const double* x, const double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + y[i];
}

void sub_scalar(double* z, const double* x, const double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] - y[i];
}

void hadamard_scalar(double* z, const double* x, const double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void scale_scalar(double* y, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void relu_scalar(double* y, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void matmul_acc_scalar(double* c, const double* a, const double* b,
                       std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = a[i * k + l];
            const double* brow = b + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += ail * brow[j];
        }
    }
}

void matvec_acc_scalar(double* y, const double* a, const double* x,
                       std::size_t m, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        std::size_t l = 0;
        for (; l + 4 <= k; l += 4) {
            s0 += arow[l] * x[l];
            s1 += arow[l + 1] * x[l + 1];
            s2 += arow[l + 2] * x[l + 2];
            s3 += arow[l + 3] * x[l + 3];
        }
        double sum = (s0 + s1) + (s2 + s3);
        for (; l < k; ++l) sum += arow[l] * x[l];
        y[i] += sum;
    }
}

void matvec_t_acc_scalar(double* y, const double* a, const double* x,
                         std::size_t m, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double xi = x[i];
        const double* arow = a + i * k;
        for (std::size_t j = 0; j < k; ++j) y[j] += xi * arow[j];
    }
}

void ger_acc_scalar(double* a, const double* u, const double* v, double alpha,
                    std::size_t m, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double ui = alpha * u[i];
        double* arow = a + i * k;
        for (std::size_t j = 0; j < k; ++j) arow[j] += ui * v[j];
    }
}

void adamw_scalar(double* theta, double* m, double* v, const double* g,
                  std::size_t n, double lr, double beta1, double beta2,
                  double bc1, double bc2, double eps, double decay_step) {
    for (std::size_t i = 0; i < n; ++i) {
        const double gi = g[i];
        const double mi = beta1 * m[i] + (1.0 - beta1) * gi;
        const double vi = beta2 * v[i] + (1.0 - beta2) * (gi * gi);
        m[i] = mi;
        v[i] = vi;
        const double theta0 = theta[i];
        const double step = lr * ((mi / bc1) / (std::sqrt(vi / bc2) + eps));
        theta[i] = (theta0 - step) - decay_step * theta0;
    }
}

}  // namespace

const Table& scalar_table() {
    static const Table t{
        "scalar",        axpy_scalar,     add_scalar,       sub_scalar,
        hadamard_scalar, scale_scalar,    relu_scalar,      matmul_acc_scalar,
        matvec_acc_scalar, matvec_t_acc_scalar, ger_acc_scalar, adamw_scalar,
    };
    return t;
}

}  // namespace rarecast::num::kernels
