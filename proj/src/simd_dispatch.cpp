#include "njee/simd.hpp"

#include <cstdlib>
#include <string_view>

namespace njee::simd {

bool avx2_available() {
#if defined(NJEE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelTable& select() {
    const char* forced = std::getenv("NJEE_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
#if defined(NJEE_HAVE_AVX2)
    if (avx2_available()) return avx2_kernels();
#endif
    return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace njee::simd
