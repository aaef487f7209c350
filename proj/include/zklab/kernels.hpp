#pragma once

#include <cstddef>
#include <cstdint>

// Small data-parallel kernels used in the hot loops of counting and
// statistics.  Each kernel has a scalar reference implementation and an
// AVX2 variant compiled in a separate translation unit; the active variant
// is picked once at runtime from CPU capabilities.  All variants are
// required to produce bit-identical results (the AVX2 code is written
// without FMA contraction so the rounding sequence matches the scalar
// loop), which the unit tests assert on random inputs.

namespace zk::kernels {

// out[i] = (bx*x[i]^2 + by*y[i]^2 + bz*z[i]^2) * x[i].
// y or z may be null for lower dimensions (treated as zero).
using dispersion_batch_fn = void (*)(const double* x, const double* y,
                                     const double* z, double bx, double by,
                                     double bz, double* out, std::size_t n);

// Number of i with |v[i] - center| <= halfwidth.
using count_in_window_fn = std::size_t (*)(const double* v, double center,
                                           double halfwidth, std::size_t n);

// Returns sum of re[i]^2 + im[i]^2 accumulated in pairwise (tree) order so
// scalar and vector variants round identically.
using sum_abs2_fn = double (*)(const double* re, const double* im,
                               std::size_t n);

struct Dispatch {
    dispersion_batch_fn dispersion_batch;
    count_in_window_fn count_in_window;
    sum_abs2_fn sum_abs2;
    const char* name;
};

// Scalar reference implementations.
extern const Dispatch scalar_dispatch;
// AVX2 implementations; null entries on platforms without AVX2 support.
extern const Dispatch avx2_dispatch;

bool cpu_has_avx2();

// Active table: AVX2 when available unless ZKLAB_NO_SIMD is set in the
// environment.  Resolved once on first call.
const Dispatch& active();

inline void dispersion_batch(const double* x, const double* y, const double* z,
                             double bx, double by, double bz, double* out,
                             std::size_t n) {
    active().dispersion_batch(x, y, z, bx, by, bz, out, n);
}

inline std::size_t count_in_window(const double* v, double center,
                                   double halfwidth, std::size_t n) {
    return active().count_in_window(v, center, halfwidth, n);
}

inline double sum_abs2(const double* re, const double* im, std::size_t n) {
    return active().sum_abs2(re, im, n);
}

}  // namespace zk::kernels
