#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "lagr/errors.hpp"

// Kernel functions, bandwidth policies, per-location weight vectors and the
// planar kernel moment constants.

namespace lagr {

struct Location {
    double u = 0.0;
    double v = 0.0;
};

enum class KernelFamily { Epanechnikov };

struct KernelSpec {
    KernelFamily family = KernelFamily::Epanechnikov;
};

struct BandwidthSpec {
    enum class Mode { Fixed, NearestNeighbor };
    Mode mode = Mode::Fixed;
    double value = 1.0;  // h for Fixed, target ratio for NearestNeighbor

    static BandwidthSpec fixed(double h) { return {Mode::Fixed, h}; }
    static BandwidthSpec nearest_neighbor(double target) {
        return {Mode::NearestNeighbor, target};
    }
};

struct WeightVector {
    Eigen::VectorXd weights;    // h^-2 K(dist/h) per observation
    double bandwidth_used = 0;  // resolved h
    int support_count = 0;      // strictly positive entries
};

struct KernelMoments {
    double kappa0 = 0;  // integral of K(||s||) over the plane
    double kappa2 = 0;  // second coordinate moment
    double nu0 = 0;     // integral of K^2
};

// K(x) for the selected family; Epanechnikov: (3/4)(1-x^2) on [0,1), else 0.
double kernel_value(double x, KernelSpec kernel = {});

// Euclidean distances from s to every location.
std::vector<double> distances_to(const Location& s, std::span<const Location> locations);

// Diagonal kernel weights at s. Nearest-neighbor bandwidths resolve through
// adaptive_bandwidth first. Throws DegenerateNeighborhood when no observation
// falls inside the support.
WeightVector local_weights(const Location& s, std::span<const Location> locations,
                           BandwidthSpec bw, KernelSpec kernel = {});

// Solves (1/n) sum_i K(dist_i / h) = target for h by bisection (ratio is
// monotone nondecreasing in h). The ratio uses unnormalized kernel values,
// so target must lie in (0, K(0)).
double adaptive_bandwidth(const Location& s, std::span<const Location> locations,
                          double target, KernelSpec kernel = {});

// kappa0, kappa2, nu0 by polar-coordinate quadrature (absolute error <= 1e-8).
KernelMoments kernel_moments(KernelSpec kernel = {});

// The default nearest-neighbor target ratio 1.5 n^(-1/6) - 0.36.
double default_bandwidth(std::size_t n);

}  // namespace lagr
