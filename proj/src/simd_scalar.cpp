#include "njee/simd.hpp"

#include <cmath>

namespace njee::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void relu_scalar(double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
}

void adam_scalar(double* params, const double* grads, double* m, double* v,
                 std::size_t n, const AdamCoefficients& c) {
    const double one_minus_b1 = 1.0 - c.beta1;
    const double one_minus_b2 = 1.0 - c.beta2;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        m[i] = c.beta1 * m[i] + one_minus_b1 * g;
        v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
        const double m_hat = m[i] * c.inv_bias1;
        const double v_hat = v[i] * c.inv_bias2;
        params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", dot_scalar, axpy_scalar, relu_scalar,
                                   adam_scalar};
    return table;
}

}  // namespace njee::simd
