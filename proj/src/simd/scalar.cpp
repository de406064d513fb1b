#include "lagr/simd.hpp"

#include <cmath>

namespace lagr::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double wdot_scalar(const double* w, const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i] * b[i];
    return acc;
}

double wsumsq_scalar(const double* w, const double* r, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * r[i] * r[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void epan_weights_scalar(const double* dist, std::size_t n, double inv_h, double inv_h2,
                         double* w) {
    for (std::size_t i = 0; i < n; ++i) {
        const double x = dist[i] * inv_h;
        w[i] = x < 1.0 ? inv_h2 * 0.75 * (1.0 - x * x) : 0.0;
    }
}

double epan_sum_scalar(const double* dist, std::size_t n, double inv_h) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = dist[i] * inv_h;
        if (x < 1.0) acc += 0.75 * (1.0 - x * x);
    }
    return acc;
}

void distances_scalar(const double* u, const double* v, std::size_t n, double u0, double v0,
                      double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double du = u[i] - u0;
        const double dv = v[i] - v0;
        out[i] = std::sqrt(du * du + dv * dv);
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{
        "scalar",        dot_scalar,      wdot_scalar,      wsumsq_scalar,
        axpy_scalar,     epan_weights_scalar, epan_sum_scalar, distances_scalar,
    };
    return ops;
}

}  // namespace lagr::simd
