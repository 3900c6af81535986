#include "qoptk/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace qoptk::kernels {

bool avx2_available() {
#if defined(QOPTK_BUILD_AVX2) && defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Backend& active() {
    static const Backend& chosen = []() -> const Backend& {
        const char* env = std::getenv("QOPTK_KERNELS");
        if (env != nullptr) {
            if (std::strcmp(env, "scalar") == 0) return scalar_backend();
            if (std::strcmp(env, "avx2") == 0 && avx2_available()) return avx2_backend();
        }
        return avx2_available() ? avx2_backend() : scalar_backend();
    }();
    return chosen;
}

} // namespace qoptk::kernels
