#include "lagr/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lagr/simd.hpp"

namespace lagr {

namespace {

constexpr double kEpanechnikovPeak = 0.75;  // K(0)

double ratio_at(const std::vector<double>& dist, double h) {
    return simd::ops().epan_sum(dist.data(), dist.size(), 1.0 / h) /
           static_cast<double>(dist.size());
}

std::string location_str(const Location& s) {
    std::ostringstream os;
    os << "(" << s.u << ", " << s.v << ")";
    return os.str();
}

}  // namespace

double kernel_value(double x, KernelSpec) {
    if (!std::isfinite(x) || x < 0.0)
        fail(ErrorKind::Input, "kernel_value: scaled distance must be finite and nonnegative");
    return x < 1.0 ? 0.75 * (1.0 - x * x) : 0.0;
}

std::vector<double> distances_to(const Location& s, std::span<const Location> locations) {
    std::vector<double> us(locations.size()), vs(locations.size()), out(locations.size());
    for (std::size_t i = 0; i < locations.size(); ++i) {
        us[i] = locations[i].u;
        vs[i] = locations[i].v;
    }
    simd::ops().distances(us.data(), vs.data(), locations.size(), s.u, s.v, out.data());
    return out;
}

WeightVector local_weights(const Location& s, std::span<const Location> locations,
                           BandwidthSpec bw, KernelSpec kernel) {
    if (locations.empty()) fail(ErrorKind::Input, "local_weights: empty location set");
    double h = bw.value;
    if (bw.mode == BandwidthSpec::Mode::NearestNeighbor)
        h = adaptive_bandwidth(s, locations, bw.value, kernel);
    if (!(h > 0.0) || !std::isfinite(h))
        fail(ErrorKind::Config, "local_weights: bandwidth must be positive and finite");

    const std::vector<double> dist = distances_to(s, locations);
    WeightVector result;
    result.weights.resize(static_cast<Eigen::Index>(locations.size()));
    simd::ops().epan_weights(dist.data(), dist.size(), 1.0 / h, 1.0 / (h * h),
                             result.weights.data());
    result.bandwidth_used = h;
    result.support_count =
        static_cast<int>((result.weights.array() > 0.0).count());
    if (result.support_count == 0)
        fail(ErrorKind::DegenerateNeighborhood,
             "local_weights: no observation inside the kernel support at location " +
                 location_str(s));
    return result;
}

double adaptive_bandwidth(const Location& s, std::span<const Location> locations,
                          double target, KernelSpec) {
    if (locations.empty()) fail(ErrorKind::Input, "adaptive_bandwidth: empty location set");
    if (!std::isfinite(target) || target <= 0.0)
        fail(ErrorKind::Config, "adaptive_bandwidth: target ratio must be positive");
    if (target >= kEpanechnikovPeak)
        fail(ErrorKind::Config,
             "adaptive_bandwidth: target ratio " + std::to_string(target) +
                 " is unattainable; it must be below K(0) = 0.75");

    const std::vector<double> dist = distances_to(s, locations);

    // Bracket scale: max pairwise extent of the point set (plus s), floored
    // so fully coincident configurations still get a usable interval.
    double umin = s.u, umax = s.u, vmin = s.v, vmax = s.v;
    for (const Location& t : locations) {
        umin = std::min(umin, t.u);
        umax = std::max(umax, t.u);
        vmin = std::min(vmin, t.v);
        vmax = std::max(vmax, t.v);
    }
    const double extent = std::max(umax - umin, vmax - vmin);
    const double scale = extent > 0.0 ? extent : 1.0;

    double lo = 1e-6 * scale;
    double hi = 4.0 * scale;
    constexpr double tol = 1e-8;

    // Ratio is nondecreasing in h and approaches K(0) from below; raise hi
    // until it clears the target.
    int expansions = 0;
    while (ratio_at(dist, hi) < target) {
        hi *= 2.0;
        if (++expansions > 60)
            fail(ErrorKind::Numerical,
                 "adaptive_bandwidth: no bracket after 60 expansions (target " +
                     std::to_string(target) + ")");
    }
    if (ratio_at(dist, lo) > target) {
        // Every bandwidth overshoots (coincident points dominate). The spec's
        // single-point limit returns the smallest bracketed h when the excess
        // is within tolerance; a larger gap means the target is unattainable.
        if (ratio_at(dist, lo) - target <= tol) return lo;
        fail(ErrorKind::Numerical,
             "adaptive_bandwidth: target ratio " + std::to_string(target) +
                 " lies below the attainable range at location " + location_str(s));
    }

    // Invariant: ratio(lo) <= target < ratio(hi) + tol. Converging on the
    // predicate ratio > target lands lo on the supremum of
    // {h : ratio(h) <= target}, so flat stretches (kernel support swallowing
    // no new point for a while) resolve to their right edge.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ratio_at(dist, mid) > target)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;
    }
    if (std::abs(ratio_at(dist, lo) - target) > tol)
        fail(ErrorKind::Numerical,
             "adaptive_bandwidth: bisection failed to reach the target ratio within 1e-8 "
             "at location " + location_str(s));
    return lo;
}

KernelMoments kernel_moments(KernelSpec) {
    // Planar integrals reduce to radial ones:
    //   kappa0 = 2*pi * int_0^1 K(r) r dr
    //   kappa2 =   pi * int_0^1 K(r) r^3 dr   (angular average of u^2 is r^2/2)
    //   nu0    = 2*pi * int_0^1 K(r)^2 r dr
    // Composite Gauss-Legendre (5-point) on [0,1]; the integrands are
    // polynomials of degree <= 5 so each panel is exact, panels guard roundoff.
    static const double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                    0.5384693101056831, 0.9061798459386640};
    static const double wts[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                  0.4786286704993665, 0.2369268850561891};
    const int panels = 64;
    double i0 = 0.0, i2 = 0.0, isq = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = static_cast<double>(p) / panels;
        const double b = static_cast<double>(p + 1) / panels;
        const double c = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int k = 0; k < 5; ++k) {
            const double r = c + half * nodes[k];
            const double w = half * wts[k];
            const double kv = 0.75 * (1.0 - r * r);
            i0 += w * kv * r;
            i2 += w * kv * r * r * r;
            isq += w * kv * kv * r;
        }
    }
    const double pi = 3.14159265358979323846;
    KernelMoments m;
    m.kappa0 = 2.0 * pi * i0;
    m.kappa2 = pi * i2;
    m.nu0 = 2.0 * pi * isq;
    if (!(m.kappa0 > 0.0) || !(m.kappa2 > 0.0) || !(m.nu0 > 0.0))
        fail(ErrorKind::Numerical, "kernel_moments: quadrature produced nonpositive moments");
    return m;
}

double default_bandwidth(std::size_t n) {
    if (n == 0) fail(ErrorKind::Input, "default_bandwidth: n must be >= 1");
    const double h = 1.5 * std::pow(static_cast<double>(n), -1.0 / 6.0) - 0.36;
    if (!(h > 0.0))
        fail(ErrorKind::Config,
             "default_bandwidth: 1.5 n^(-1/6) - 0.36 is nonpositive for n = " +
                 std::to_string(n) + "; pass an explicit bandwidth");
    return h;
}

}  // namespace lagr
