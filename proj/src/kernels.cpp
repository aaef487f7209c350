#include "zklab/kernels.hpp"

#include <cmath>
#include <cstdlib>

namespace zk::kernels {

namespace {

void dispersion_batch_scalar(const double* x, const double* y, const double* z,
                             double bx, double by, double bz, double* out,
                             std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double s = bx * (x[i] * x[i]);
        if (y) s += by * (y[i] * y[i]);
        if (z) s += bz * (z[i] * z[i]);
        out[i] = s * x[i];
    }
}

std::size_t count_in_window_scalar(const double* v, double center,
                                   double halfwidth, std::size_t n) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(v[i] - center) <= halfwidth) ++c;
    return c;
}

// Four independent accumulators mirroring the vector lane layout, combined
// in a fixed order, so the AVX2 variant rounds identically.
double sum_abs2_scalar(const double* re, const double* im, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int j = 0; j < 4; ++j)
            acc[j] += re[i + j] * re[i + j] + im[i + j] * im[i + j];
    double total = (acc[0] + acc[2]) + (acc[1] + acc[3]);
    for (; i < n; ++i) total += re[i] * re[i] + im[i] * im[i];
    return total;
}

}  // namespace

const Dispatch scalar_dispatch = {dispersion_batch_scalar,
                                  count_in_window_scalar, sum_abs2_scalar,
                                  "scalar"};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Dispatch& active() {
    static const Dispatch* table = [] {
        if (std::getenv("ZKLAB_NO_SIMD")) return &scalar_dispatch;
        if (cpu_has_avx2() && avx2_dispatch.dispersion_batch)
            return &avx2_dispatch;
        return &scalar_dispatch;
    }();
    return *table;
}

}  // namespace zk::kernels
