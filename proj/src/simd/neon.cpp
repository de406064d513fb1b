// NEON backend, 2 doubles per lane. aarch64 only; NEON is baseline there so
// no runtime feature probe is needed.

#include "lagr/simd.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace lagr::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double wdot_neon(const double* w, const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t ab = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, vld1q_f64(w + i), ab);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
}

double wsumsq_neon(const double* w, const double* r, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t rv = vld1q_f64(r + i);
        acc = vfmaq_f64(acc, vld1q_f64(w + i), vmulq_f64(rv, rv));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += w[i] * r[i] * r[i];
    return s;
}

// Elementwise kernels avoid fused ops so they agree bitwise with the scalar
// reference.
void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(av, vld1q_f64(x + i))));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void epan_weights_neon(const double* dist, std::size_t n, double inv_h, double inv_h2,
                       double* w) {
    const float64x2_t ih = vdupq_n_f64(inv_h);
    const float64x2_t one = vdupq_n_f64(1.0);
    const float64x2_t c = vdupq_n_f64(0.75 * inv_h2);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t x = vmulq_f64(vld1q_f64(dist + i), ih);
        const float64x2_t val = vmulq_f64(c, vsubq_f64(one, vmulq_f64(x, x)));
        const uint64x2_t mask = vcltq_f64(x, one);
        vst1q_f64(w + i, vreinterpretq_f64_u64(
                             vandq_u64(vreinterpretq_u64_f64(val), mask)));
    }
    for (; i < n; ++i) {
        const double x = dist[i] * inv_h;
        w[i] = x < 1.0 ? inv_h2 * 0.75 * (1.0 - x * x) : 0.0;
    }
}

double epan_sum_neon(const double* dist, std::size_t n, double inv_h) {
    const float64x2_t ih = vdupq_n_f64(inv_h);
    const float64x2_t one = vdupq_n_f64(1.0);
    const float64x2_t c = vdupq_n_f64(0.75);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t x = vmulq_f64(vld1q_f64(dist + i), ih);
        const float64x2_t val = vmulq_f64(c, vsubq_f64(one, vmulq_f64(x, x)));
        const uint64x2_t mask = vcltq_f64(x, one);
        acc = vaddq_f64(acc, vreinterpretq_f64_u64(
                                 vandq_u64(vreinterpretq_u64_f64(val), mask)));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double x = dist[i] * inv_h;
        if (x < 1.0) s += 0.75 * (1.0 - x * x);
    }
    return s;
}

void distances_neon(const double* u, const double* v, std::size_t n, double u0, double v0,
                    double* out) {
    const float64x2_t u0v = vdupq_n_f64(u0);
    const float64x2_t v0v = vdupq_n_f64(v0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t du = vsubq_f64(vld1q_f64(u + i), u0v);
        const float64x2_t dv = vsubq_f64(vld1q_f64(v + i), v0v);
        const float64x2_t d2 = vaddq_f64(vmulq_f64(du, du), vmulq_f64(dv, dv));
        vst1q_f64(out + i, vsqrtq_f64(d2));
    }
    for (; i < n; ++i) {
        const double du = u[i] - u0;
        const double dv = v[i] - v0;
        out[i] = std::sqrt(du * du + dv * dv);
    }
}

}  // namespace

const Ops& neon_ops() {
    static const Ops ops{
        "neon",      dot_neon,      wdot_neon,      wsumsq_neon,
        axpy_neon,   epan_weights_neon, epan_sum_neon, distances_neon,
    };
    return ops;
}

}  // namespace lagr::simd

#endif  // __aarch64__
