#pragma once

// Vector kernels used by the classifier engine's inner loops.
//
// Every kernel exists as a portable scalar reference and, on x86-64, as an
// AVX2/FMA variant. The active table is chosen once at startup from the CPU
// feature bits; NJEE_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace njee::simd {

struct AdamCoefficients {
    double learning_rate;
    double beta1;
    double beta2;
    double epsilon;
    double inv_bias1;  // 1 / (1 - beta1^t)
    double inv_bias2;  // 1 / (1 - beta2^t)
};

struct KernelTable {
    std::string_view name;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    // y[i] = max(y[i], 0)
    void (*relu)(double* y, std::size_t n);

    // Bias-corrected ADAM update applied element-wise over flat arrays.
    void (*adam)(double* params, const double* grads, double* m, double* v,
                 std::size_t n, const AdamCoefficients& c);
};

const KernelTable& scalar_kernels();

#if defined(NJEE_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

// True when the running CPU supports the AVX2 table.
bool avx2_available();

// Table selected for this process.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), y.size());
}

inline void relu(std::span<double> y) { active().relu(y.data(), y.size()); }

}  // namespace njee::simd
