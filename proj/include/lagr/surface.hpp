#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lagr/tuning.hpp"

// Whole-surface driver: independent per-location LAGR (or unpenalized VCR)
// fits at a list of evaluation points, optionally tuned per location.

namespace lagr {

struct SurfaceOptions {
    BandwidthSpec bw = BandwidthSpec::fixed(1.0);
    KernelSpec kernel;
    double gamma = 2.0;
    std::optional<double> fixed_lambda;  // nullopt -> per-location AIC tuning
    GridSpec grid;
    Family family = Family::make(FamilyName::Gaussian);
    double tol = 1e-7;
    int max_sweeps = 10000;
    int max_outer = 100;
    int workers = 1;
};

struct PathPoint {
    double lambda = 0.0;
    double df_hat = 0.0;
    double weighted_deviance = 0.0;
    double aic = 0.0;
};

struct LocationFit {
    Location s;
    bool ok = false;
    std::string error;  // set when !ok
    FitResult fit;
    LocalCoefficients pilot;
    double df_hat = 0.0;
    double weighted_deviance = 0.0;
    double aic = 0.0;
    double sigma2 = 1.0;
    double bandwidth_used = 0.0;
    std::vector<PathPoint> path;  // tuning path (empty for fixed lambda)
};

struct CoefficientSurface {
    std::vector<LocationFit> fits;  // aligned with the evaluation points
    GroupLayout layout;
    std::vector<std::string> names;  // per group, intercept first when present

    int n_failed() const {
        int k = 0;
        for (const LocationFit& f : fits) k += f.ok ? 0 : 1;
        return k;
    }
};

// Independent fits at each evaluation point; per-location failures are
// recorded in the surface, not fatal to other points. The result is
// deterministic and independent of the worker count.
CoefficientSurface fit_surface(const Dataset& dataset, std::span<const Location> eval_points,
                               const SurfaceOptions& options);

}  // namespace lagr
