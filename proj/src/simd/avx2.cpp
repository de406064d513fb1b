// AVX2 + FMA backend, 4 doubles per lane. Compiled with -mavx2 -mfma and
// reached only through runtime dispatch, so the rest of the binary stays
// runnable on plain SSE2 hardware.

#include "lagr/simd.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace lagr::simd {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double wdot_avx2(const double* w, const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), ab, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
}

double wsumsq_avx2(const double* w, const double* r, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d rv = _mm256_loadu_pd(r + i);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(rv, rv), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * r[i] * r[i];
    return s;
}

// Elementwise kernels below avoid FMA on purpose: they promise bitwise
// agreement with the scalar reference (reductions only promise agreement up
// to reassociation).
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d yv = _mm256_add_pd(_mm256_loadu_pd(y + i),
                                         _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void epan_weights_avx2(const double* dist, std::size_t n, double inv_h, double inv_h2,
                       double* w) {
    const __m256d ih = _mm256_set1_pd(inv_h);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d c = _mm256_set1_pd(0.75 * inv_h2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_mul_pd(_mm256_loadu_pd(dist + i), ih);
        const __m256d val =
            _mm256_mul_pd(c, _mm256_sub_pd(one, _mm256_mul_pd(x, x)));  // c*(1-x^2)
        const __m256d mask = _mm256_cmp_pd(x, one, _CMP_LT_OQ);
        _mm256_storeu_pd(w + i, _mm256_and_pd(val, mask));
    }
    for (; i < n; ++i) {
        const double x = dist[i] * inv_h;
        w[i] = x < 1.0 ? inv_h2 * 0.75 * (1.0 - x * x) : 0.0;
    }
}

double epan_sum_avx2(const double* dist, std::size_t n, double inv_h) {
    const __m256d ih = _mm256_set1_pd(inv_h);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d c = _mm256_set1_pd(0.75);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_mul_pd(_mm256_loadu_pd(dist + i), ih);
        const __m256d val = _mm256_mul_pd(c, _mm256_sub_pd(one, _mm256_mul_pd(x, x)));
        const __m256d mask = _mm256_cmp_pd(x, one, _CMP_LT_OQ);
        acc = _mm256_add_pd(acc, _mm256_and_pd(val, mask));
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double x = dist[i] * inv_h;
        if (x < 1.0) s += 0.75 * (1.0 - x * x);
    }
    return s;
}

void distances_avx2(const double* u, const double* v, std::size_t n, double u0, double v0,
                    double* out) {
    const __m256d u0v = _mm256_set1_pd(u0);
    const __m256d v0v = _mm256_set1_pd(v0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d du = _mm256_sub_pd(_mm256_loadu_pd(u + i), u0v);
        const __m256d dv = _mm256_sub_pd(_mm256_loadu_pd(v + i), v0v);
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(du, du), _mm256_mul_pd(dv, dv));
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(d2));
    }
    for (; i < n; ++i) {
        const double du = u[i] - u0;
        const double dv = v[i] - v0;
        out[i] = std::sqrt(du * du + dv * dv);
    }
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{
        "avx2",      dot_avx2,      wdot_avx2,      wsumsq_avx2,
        axpy_avx2,   epan_weights_avx2, epan_sum_avx2, distances_avx2,
    };
    return ops;
}

}  // namespace lagr::simd

#endif  // __AVX2__
