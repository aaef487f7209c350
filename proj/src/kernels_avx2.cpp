#include "zklab/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace zk::kernels {

namespace {

void dispersion_batch_avx2(const double* x, const double* y, const double* z,
                           double bx, double by, double bz, double* out,
                           std::size_t n) {
    const __m256d vbx = _mm256_set1_pd(bx);
    const __m256d vby = _mm256_set1_pd(by);
    const __m256d vbz = _mm256_set1_pd(bz);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d s = _mm256_mul_pd(vbx, _mm256_mul_pd(vx, vx));
        if (y) {
            __m256d vy = _mm256_loadu_pd(y + i);
            s = _mm256_add_pd(s, _mm256_mul_pd(vby, _mm256_mul_pd(vy, vy)));
        }
        if (z) {
            __m256d vz = _mm256_loadu_pd(z + i);
            s = _mm256_add_pd(s, _mm256_mul_pd(vbz, _mm256_mul_pd(vz, vz)));
        }
        _mm256_storeu_pd(out + i, _mm256_mul_pd(s, vx));
    }
    for (; i < n; ++i) {
        double s = bx * (x[i] * x[i]);
        if (y) s += by * (y[i] * y[i]);
        if (z) s += bz * (z[i] * z[i]);
        out[i] = s * x[i];
    }
}

std::size_t count_in_window_avx2(const double* v, double center,
                                 double halfwidth, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(center);
    const __m256d vw = _mm256_set1_pd(halfwidth);
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    std::size_t c = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(v + i), vc);
        d = _mm256_andnot_pd(sign_mask, d);
        __m256d m = _mm256_cmp_pd(d, vw, _CMP_LE_OQ);
        c += static_cast<std::size_t>(__builtin_popcount(
            static_cast<unsigned>(_mm256_movemask_pd(m))));
    }
    for (; i < n; ++i)
        if (std::abs(v[i] - center) <= halfwidth) ++c;
    return c;
}

double sum_abs2_avx2(const double* re, const double* im, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_loadu_pd(re + i);
        __m256d m = _mm256_loadu_pd(im + i);
        acc = _mm256_add_pd(
            acc, _mm256_add_pd(_mm256_mul_pd(r, r), _mm256_mul_pd(m, m)));
    }
    // Reduce as (lane0+lane2) + (lane1+lane3), matching the scalar variant.
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d pair = _mm_add_pd(lo, hi);
    double total = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
    for (; i < n; ++i) total += re[i] * re[i] + im[i] * im[i];
    return total;
}

}  // namespace

const Dispatch avx2_dispatch = {dispersion_batch_avx2, count_in_window_avx2,
                                sum_abs2_avx2, "avx2"};

}  // namespace zk::kernels

#else

namespace zk::kernels {
const Dispatch avx2_dispatch = {nullptr, nullptr, nullptr, "avx2-missing"};
}

#endif
