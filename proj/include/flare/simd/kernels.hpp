#pragma once

// Data-parallel inner loops shared by the numerical modules.
//
// Every kernel has a portable scalar reference implementation and, on x86-64
// builds, an AVX2/FMA variant. The variant is picked once at runtime from the
// CPU feature bits; setting FLARE_SIMD=scalar in the environment forces the
// reference path. Reductions in the vector path sum in four lanes, so results
// agree with the scalar path to rounding, not bit-for-bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace flare::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    // sum of (x - center)^2
    double (*sum_sq_dev)(const double* x, std::size_t n, double center);
    // writes indices i with x[i] > threshold to out (ascending), returns count
    std::size_t (*select_above)(const double* x, std::size_t n, double threshold,
                                std::uint32_t* out);
    // squared chord distance from (qx,qy,qz) to each point of a SoA cloud
    void (*chord2)(const double* xs, const double* ys, const double* zs, std::size_t n,
                   double qx, double qy, double qz, double* out);
};

bool isa_available(Isa isa);

// Table for a specific ISA; throws std::runtime_error if the CPU lacks it.
const KernelTable& kernels(Isa isa);

// Table chosen at first use.
const KernelTable& kernels();

Isa active_isa();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    kernels().axpy(a, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

inline double sum(std::span<const double> x) { return kernels().sum(x.data(), x.size()); }

namespace detail {
// Reference implementations, exposed for the equivalence tests.
const KernelTable& scalar_table();
#if defined(FLARE_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace flare::simd
