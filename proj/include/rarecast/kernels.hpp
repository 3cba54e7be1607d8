#pragma once

#include <cstddef>

namespace rarecast::num::kernels {

// Data-parallel inner loops behind the numeric layer. Each entry has a
// scalar reference implementation and, on machines with AVX2, a vector
// variant that produces bit-identical results (same per-element operation
// order, no fused multiply-add). The active table is selected once at
// startup; RARECAST_KERNELS=scalar|avx2 overrides the choice.
struct Table {
    const char* name;

    // y[i] += a * x[i]
    void (*axpy)(double* y, const double* x, double a, std::size_t n);
    // z[i] = x[i] op y[i]; z may alias x or y
    void (*add)(double* z, const double* x, const double* y, std::size_t n);
    void (*sub)(double* z, const double* x, const double* y, std::size_t n);
    void (*hadamard)(double* z, const double* x, const double* y, std::size_t n);
    // y[i] = a * x[i]
    void (*scale)(double* y, const double* x, double a, std::size_t n);
    // y[i] = max(x[i], 0)
    void (*relu)(double* y, const double* x, std::size_t n);

    // C[m x n] += A[m x k] * B[k x n], row-major.
    // Accumulation order per output element: ascending inner index.
    void (*matmul_acc)(double* c, const double* a, const double* b,
                       std::size_t m, std::size_t k, std::size_t n);

    // y[m] += A[m x k] * x[k]. Each row dot product keeps four striped
    // partial sums (lane r sums indices congruent r mod 4), combined as
    // (s0+s1)+(s2+s3) before the scalar tail.
    void (*matvec_acc)(double* y, const double* a, const double* x,
                       std::size_t m, std::size_t k);

    // y[k] += A^T x, i.e. y += x[i] * A[i,:] for ascending i.
    void (*matvec_t_acc)(double* y, const double* a, const double* x,
                         std::size_t m, std::size_t k);

    // A[m x k] += alpha * u v^T
    void (*ger_acc)(double* a, const double* u, const double* v, double alpha,
                    std::size_t m, std::size_t k);

    // Fused AdamW coordinate update. Per element, in this exact order:
    //   m = b1*m + (1-b1)*g
    //   v = b2*v + (1-b2)*g*g
    //   theta = (theta - lr*((m/bc1) / (sqrt(v/bc2) + eps))) - decay_step*theta0
    // where theta0 is the pre-update value and decay_step = lr*lambda
    // (0 for decay-exempt blocks).
    void (*adamw)(double* theta, double* m, double* v, const double* g,
                  std::size_t n, double lr, double beta1, double beta2,
                  double bc1, double bc2, double eps, double decay_step);
};

const Table& scalar_table();

// Null when the CPU lacks AVX2.
const Table* avx2_table();

const Table& active();
void set_active(const Table& table);

}  // namespace rarecast::num::kernels
