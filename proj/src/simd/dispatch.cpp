#include <cstdlib>
#include <stdexcept>
#include <string>

#include "flare/simd/kernels.hpp"

namespace flare::simd {

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(FLARE_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& kernels(Isa isa) {
    if (!isa_available(isa)) {
        throw std::runtime_error("SIMD kernels for " + std::string(isa_name(isa)) +
                                 " are not available on this CPU");
    }
#if defined(FLARE_HAVE_AVX2)
    if (isa == Isa::avx2) return detail::avx2_table();
#endif
    return detail::scalar_table();
}

namespace {

Isa pick_isa() {
    if (const char* forced = std::getenv("FLARE_SIMD")) {
        if (std::string_view(forced) == "scalar") return Isa::scalar;
    }
    return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

}  // namespace

Isa active_isa() {
    static const Isa isa = pick_isa();
    return isa;
}

const KernelTable& kernels() {
    static const KernelTable& table = kernels(active_isa());
    return table;
}

}  // namespace flare::simd
