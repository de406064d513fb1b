#pragma once

#include <vector>

#include "lagr/glm.hpp"
#include "lagr/solver.hpp"

// Per-location lambda selection by approximate degrees of freedom and AIC.

namespace lagr {

struct GridSpec {
    int n_points = 50;
    double ratio = 1e-3;  // lambda_min / lambda_max
};

struct TuningGrid {
    std::vector<double> lambdas;  // strictly decreasing, log-spaced
};

struct AicRecord {
    double lambda = 0.0;
    double df_hat = 0.0;
    double weighted_deviance = 0.0;
    double aic = 0.0;  // weighted_deviance + 2 * df_hat, bitwise
    FitResult fit;
};

struct SelectionResult {
    AicRecord best;
    std::vector<AicRecord> path;  // in grid (descending lambda) order
    LocalCoefficients pilot;
    double sigma2 = 1.0;  // gaussian pilot estimate; 1 for GLM families
};

// df = sum_j [ I(||zeta_hat_(j)|| > 0) + d * min(1, ||zeta_hat_(j)|| / ||pilot_(j)||) ]
// over penalized groups, plus 3 for the unpenalized intercept group.
double df_hat(const FitResult& fit, const LocalCoefficients& pilot, int d = 2);

// Gaussian: weighted_deviance = sigma^-2 sum_i w_i (y_i - Z_i' zeta_hat)^2.
// Other families: weighted quasi-deviance sum_i w_i * dev_unit(mu_i, y_i).
AicRecord aic_record(const LocalProblem& problem, FitResult fit,
                     const LocalCoefficients& pilot, double sigma2, const Family& family,
                     int d = 2);

// Grid from lambda_max = max_j ||Z_(j)' W r0|| * ||pilot_(j)||^gamma (r0 the
// intercept-adjusted response; the quasi-score analog for GLMs) down to
// ratio * lambda_max. Verifies that lambda_max zeroes every penalized group.
TuningGrid build_tuning_grid(const LocalProblem& problem, const LocalCoefficients& pilot,
                             double gamma, const GridSpec& spec, const Family& family,
                             double tol = 1e-7, int max_sweeps = 10000);

// AIC path over the grid with warm starts; ties broken toward larger lambda.
SelectionResult select_lambda(const LocalProblem& problem, double gamma, const GridSpec& spec,
                              const Family& family = Family::make(FamilyName::Gaussian),
                              double tol = 1e-7, int max_sweeps = 10000, int max_outer = 100);
SelectionResult select_lambda(const Dataset& dataset, const Location& s, BandwidthSpec bw,
                              double gamma, const GridSpec& spec,
                              const Family& family = Family::make(FamilyName::Gaussian),
                              double tol = 1e-7, int max_sweeps = 10000, int max_outer = 100);

struct RateReport {
    double alpha = 0.0;  // log(lambda) / log(n)
    double lower = 0.0;  // (2 - gamma) / 3
    double upper = 1.0 / 3.0;
    bool inside = false;
    bool gamma_ok = true;
    std::string note;
};

// Advisory check of the lambda_n = n^alpha rate window; never blocks a fit.
RateReport validate_lambda_rate(int n, double lambda, double gamma);

}  // namespace lagr
