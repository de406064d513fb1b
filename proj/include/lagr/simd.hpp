#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Vectorized inner loops shared by the local fitters. Every kernel has a
// scalar reference implementation; AVX2 (x86-64) and NEON (aarch64) variants
// are selected at runtime and must agree with the reference up to
// floating-point reassociation (see tests/test_simd.cpp).
//
// Conventions: all arrays are dense double buffers of length n, no aliasing
// between distinct arguments, `dist` entries are nonnegative.

namespace lagr::simd {

struct Ops {
    const char* name;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    // sum_i w[i] * a[i] * b[i]   (weighted Gram / correlation entries)
    double (*wdot)(const double* w, const double* a, const double* b, std::size_t n);

    // sum_i w[i] * r[i]^2
    double (*wsumsq)(const double* w, const double* r, std::size_t n);

    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    // w[i] = inv_h2 * K(dist[i] * inv_h) with the Epanechnikov K
    void (*epan_weights)(const double* dist, std::size_t n, double inv_h, double inv_h2,
                         double* w);

    // sum_i K(dist[i] * inv_h), unnormalized (nearest-neighbor ratio)
    double (*epan_sum)(const double* dist, std::size_t n, double inv_h);

    // out[i] = sqrt((u[i]-u0)^2 + (v[i]-v0)^2)
    void (*distances)(const double* u, const double* v, std::size_t n, double u0, double v0,
                      double* out);
};

// Active backend. Resolved once on first use: AVX2+FMA when the CPU has it,
// NEON on aarch64, scalar otherwise. LAGR_SIMD=scalar|avx2|neon overrides.
const Ops& ops();

// Always the scalar reference (used by the equivalence tests).
const Ops& scalar_ops();

// All backends compiled into this binary that the current CPU can run.
std::vector<const Ops*> available_backends();

}  // namespace lagr::simd
