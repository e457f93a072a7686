#include "njee/simd.hpp"

#include <immintrin.h>

#include <cmath>

namespace njee::simd {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu_avx2(double* y, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // max_pd returns the second operand when the first is NaN or both are
        // zero, matching the scalar select.
        _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(y + i), zero));
    }
    for (; i < n; ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
}

// No FMA here: the update must stay bit-identical to the scalar reference so
// training runs reproduce exactly regardless of the selected table.
void adam_avx2(double* params, const double* grads, double* m, double* v,
               std::size_t n, const AdamCoefficients& c) {
    const __m256d b1 = _mm256_set1_pd(c.beta1);
    const __m256d b2 = _mm256_set1_pd(c.beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - c.beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - c.beta2);
    const __m256d ib1 = _mm256_set1_pd(c.inv_bias1);
    const __m256d ib2 = _mm256_set1_pd(c.inv_bias2);
    const __m256d lr = _mm256_set1_pd(c.learning_rate);
    const __m256d eps = _mm256_set1_pd(c.epsilon);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grads + i);
        __m256d vm = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                   _mm256_mul_pd(omb1, g));
        __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d m_hat = _mm256_mul_pd(vm, ib1);
        const __m256d v_hat = _mm256_mul_pd(vv, ib2);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, m_hat),
                                           _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
        _mm256_storeu_pd(params + i, _mm256_sub_pd(_mm256_loadu_pd(params + i), step));
    }
    const double one_minus_b1 = 1.0 - c.beta1;
    const double one_minus_b2 = 1.0 - c.beta2;
    for (; i < n; ++i) {
        const double g = grads[i];
        m[i] = c.beta1 * m[i] + one_minus_b1 * g;
        v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
        const double m_hat = m[i] * c.inv_bias1;
        const double v_hat = v[i] * c.inv_bias2;
        params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

}  // namespace

const KernelTable& avx2_kernels() {
    static const KernelTable table{"avx2", dot_avx2, axpy_avx2, relu_avx2, adam_avx2};
    return table;
}

}  // namespace njee::simd
