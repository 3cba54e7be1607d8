#include "rarecast/kernels.hpp"

// AVX2 variants of the reference kernels. Every kernel applies the same
// per-element operation order as kernels_scalar.cpp — multiplies and adds
// are kept separate (no FMA), matvec accumulates four striped partial sums
// combined as (s0+s1)+(s2+s3), and remainder elements run the scalar code —
// so results are bitwise identical to the scalar table.

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace rarecast::num::kernels {
namespace {

void axpy_avx2(double* y, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void add_avx2(double* z, const double* x, const double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(z + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                                              _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) z[i] = x[i] + y[i];
}

void sub_avx2(double* z, const double* x, const double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(z + i, _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                              _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) z[i] = x[i] - y[i];
}

void hadamard_avx2(double* z, const double* x, const double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(z + i, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                              _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) z[i] = x[i] * y[i];
}

void scale_avx2(double* y, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) y[i] = a * x[i];
}

void relu_avx2(double* y, const double* x, std::size_t n) {
    // max_pd(x, 0) returns 0 when x is NaN or -0.0, matching `x > 0 ? x : 0`.
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void matmul_acc_avx2(double* c, const double* a, const double* b,
                     std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = a[i * k + l];
            const double* brow = b + l * n;
            const __m256d vail = _mm256_set1_pd(ail);
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                const __m256d vc = _mm256_loadu_pd(crow + j);
                const __m256d vb = _mm256_loadu_pd(brow + j);
                _mm256_storeu_pd(crow + j,
                                 _mm256_add_pd(vc, _mm256_mul_pd(vail, vb)));
            }
            for (; j < n; ++j) crow[j] += ail * brow[j];
        }
    }
}

void matvec_acc_avx2(double* y, const double* a, const double* x,
                     std::size_t m, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        __m256d acc = _mm256_setzero_pd();
        std::size_t l = 0;
        for (; l + 4 <= k; l += 4) {
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(arow + l),
                                                   _mm256_loadu_pd(x + l)));
        }
        // acc lanes hold the striped sums (s0,s1,s2,s3); combine exactly as
        // the scalar kernel does: (s0+s1)+(s2+s3).
        const __m128d lo = _mm256_castpd256_pd128(acc);
        const __m128d hi = _mm256_extractf128_pd(acc, 1);
        const __m128d s01 = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));
        const __m128d s23 = _mm_add_sd(hi, _mm_unpackhi_pd(hi, hi));
        double sum = _mm_cvtsd_f64(_mm_add_sd(s01, s23));
        for (; l < k; ++l) sum += arow[l] * x[l];
        y[i] += sum;
    }
}

void matvec_t_acc_avx2(double* y, const double* a, const double* x,
                       std::size_t m, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double xi = x[i];
        const double* arow = a + i * k;
        const __m256d vxi = _mm256_set1_pd(xi);
        std::size_t j = 0;
        for (; j + 4 <= k; j += 4) {
            const __m256d vy = _mm256_loadu_pd(y + j);
            const __m256d va = _mm256_loadu_pd(arow + j);
            _mm256_storeu_pd(y + j, _mm256_add_pd(vy, _mm256_mul_pd(vxi, va)));
        }
        for (; j < k; ++j) y[j] += xi * arow[j];
    }
}

void ger_acc_avx2(double* a, const double* u, const double* v, double alpha,
                  std::size_t m, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double ui = alpha * u[i];
        double* arow = a + i * k;
        const __m256d vui = _mm256_set1_pd(ui);
        std::size_t j = 0;
        for (; j + 4 <= k; j += 4) {
            const __m256d va = _mm256_loadu_pd(arow + j);
            const __m256d vv = _mm256_loadu_pd(v + j);
            _mm256_storeu_pd(arow + j, _mm256_add_pd(va, _mm256_mul_pd(vui, vv)));
        }
        for (; j < k; ++j) arow[j] += ui * v[j];
    }
}

void adamw_avx2(double* theta, double* m, double* v, const double* g,
                std::size_t n, double lr, double beta1, double beta2,
                double bc1, double bc2, double eps, double decay_step) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb1c = _mm256_set1_pd(1.0 - beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vb2c = _mm256_set1_pd(1.0 - beta2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d vbc1 = _mm256_set1_pd(bc1);
    const __m256d vbc2 = _mm256_set1_pd(bc2);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vdec = _mm256_set1_pd(decay_step);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        const __m256d mi = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                                         _mm256_mul_pd(vb1c, gi));
        const __m256d vi = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                         _mm256_mul_pd(vb2c, _mm256_mul_pd(gi, gi)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d theta0 = _mm256_loadu_pd(theta + i);
        const __m256d mhat = _mm256_div_pd(mi, vbc1);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_div_pd(vi, vbc2)), veps);
        const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom));
        _mm256_storeu_pd(theta + i,
                         _mm256_sub_pd(_mm256_sub_pd(theta0, step),
                                       _mm256_mul_pd(vdec, theta0)));
    }
    for (; i < n; ++i) {
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

const Table* avx2_table() {
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    static const Table t{
        "avx2",        axpy_avx2,       add_avx2,         sub_avx2,
        hadamard_avx2, scale_avx2,      relu_avx2,        matmul_acc_avx2,
        matvec_acc_avx2, matvec_t_acc_avx2, ger_acc_avx2, adamw_avx2,
    };
    return &t;
}

}  // namespace rarecast::num::kernels

#else  // !__AVX2__

namespace rarecast::num::kernels {

const Table* avx2_table() { return nullptr; }

}  // namespace rarecast::num::kernels

#endif
