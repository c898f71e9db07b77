#include <cstdlib>
#include <cstring>

#include "fibscat/kernels.hpp"

namespace fibscat::kernels {

#if defined(FIBSCAT_HAVE_AVX2)
const KernelTable& avx2_kernels() noexcept;
#endif

const KernelTable* avx2_table() noexcept {
#if defined(FIBSCAT_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &avx2_kernels() : nullptr;
#else
    return nullptr;
#endif
}

namespace {

const KernelTable& choose() noexcept {
    const char* env = std::getenv("FIBSCAT_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
    static const KernelTable& table = choose();
    return table;
}

}  // namespace fibscat::kernels
