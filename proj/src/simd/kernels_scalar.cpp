#include "flare/simd/kernels.hpp"

namespace flare::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sum_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double sum_sq_dev_scalar(const double* x, std::size_t n, double center) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - center;
        s += d * d;
    }
    return s;
}

std::size_t select_above_scalar(const double* x, std::size_t n, double threshold,
                                std::uint32_t* out) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > threshold) out[count++] = static_cast<std::uint32_t>(i);
    }
    return count;
}

void chord2_scalar(const double* xs, const double* ys, const double* zs, std::size_t n,
                   double qx, double qy, double qz, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        const double dz = zs[i] - qz;
        out[i] = dx * dx + dy * dy + dz * dz;
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{Isa::scalar,       dot_scalar,          axpy_scalar,
                                   sum_scalar,        sum_sq_dev_scalar,   select_above_scalar,
                                   chord2_scalar};
    return table;
}

}  // namespace flare::simd::detail
