#include "lagr/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace lagr::simd {

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();  // defined in avx2.cpp (weak presence via build system)
namespace {
bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}
}  // namespace
#endif

#if defined(__aarch64__)
const Ops& neon_ops();
#endif

namespace {

const Ops& resolve() {
    const char* forced = std::getenv("LAGR_SIMD");
    if (forced != nullptr) {
        if (std::strcmp(forced, "scalar") == 0) return scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(forced, "avx2") == 0 && cpu_has_avx2()) return avx2_ops();
#endif
#if defined(__aarch64__)
        if (std::strcmp(forced, "neon") == 0) return neon_ops();
#endif
        return scalar_ops();
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) return avx2_ops();
#endif
#if defined(__aarch64__)
    return neon_ops();
#endif
    return scalar_ops();
}

}  // namespace

const Ops& ops() {
    static const Ops& active = resolve();
    return active;
}

std::vector<const Ops*> available_backends() {
    std::vector<const Ops*> list{&scalar_ops()};
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) list.push_back(&avx2_ops());
#endif
#if defined(__aarch64__)
    list.push_back(&neon_ops());
#endif
    return list;
}

}  // namespace lagr::simd
