#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "lagr/design.hpp"

// Penalized local sum of squares
//   J(zeta) = (1/2)(y - Z zeta)' W (y - Z zeta) + sum_j phi_j ||zeta_(j)||
// minimized by blockwise coordinate descent with exact 3x3 group solutions.

namespace lagr {

struct PenaltySpec {
    double lambda = 0.0;  // local tuning parameter, >= 0
    double gamma = 2.0;   // adaptive exponent, must be > 1 (= d/2 with d=2)
};

struct AdaptiveWeights {
    Eigen::VectorXd phi;           // per group; +inf marks groups forced to zero
    Eigen::VectorXd source_norms;  // pilot group norms the weights came from
};

struct FitResult {
    LocalCoefficients zeta_hat;
    std::vector<bool> active;            // ||zeta_hat_(j)|| > 0 per group
    double lambda = 0.0;
    std::vector<double> objective_trace; // value at init, then after each sweep
    int iterations = 0;                  // completed sweeps
    bool converged = false;
};

// phi_j = lambda * ||pilot_(j)||^(-gamma) for penalized groups, 0 for the
// intercept group, +inf when the pilot norm is exactly zero (lambda > 0).
AdaptiveWeights adaptive_penalties(const LocalCoefficients& pilot, const PenaltySpec& spec);

// Eq-style objective on the full design; +inf when an inf-penalty group is
// nonzero.
double lagr_objective(const Eigen::VectorXd& zeta, const AugmentedDesign& design,
                      const WeightVector& W, const Eigen::VectorXd& y,
                      const AdaptiveWeights& phi);

// argmin over g of (1/2) g'Ag - b'g + phi ||g||. Exact: 0 when ||b|| <= phi,
// otherwise the secular-equation solution over A's eigenpairs.
Eigen::Vector3d group_update(const Eigen::Matrix3d& A, const Eigen::Vector3d& b, double phi);

// Observations inside the kernel support, compacted for the inner loops.
struct LocalProblem {
    Eigen::MatrixXd Z;        // m x 3p (support rows only)
    Eigen::VectorXd w;        // m, strictly positive
    Eigen::VectorXd y;        // m
    std::vector<int> rows;    // original observation indices
    GroupLayout layout;
    Location center;
    double bandwidth_used = 0.0;
    int n_total = 0;          // observations in the parent dataset
};

LocalProblem build_local_problem(const Dataset& dataset, const Location& s, BandwidthSpec bw,
                                 KernelSpec kernel = {});

// Pilot (unpenalized) fit on a compacted problem.
LocalCoefficients pilot_fit(const LocalProblem& problem);

// Coordinate descent on the compacted problem. `phi` entries may be +inf
// (group pinned at zero). When every penalty is zero the closed-form WLS
// minimizer is returned directly.
FitResult solve_penalized_quadratic(const LocalProblem& problem, const Eigen::VectorXd& phi,
                                    const LocalCoefficients& init, double lambda_tag,
                                    double tol, int max_sweeps);

// Full pipeline at one location: weights, pilot, adaptive penalties, descent.
FitResult fit_lagr(const Dataset& dataset, const Location& s, BandwidthSpec bw,
                   const PenaltySpec& spec, double tol = 1e-7, int max_sweeps = 10000);

// Max KKT stationarity violation of `fit` for the given penalties, normalized
// by scale = max(1, max_j ||Z_(j)' W y||). Zero-group condition uses the
// subgradient bound ||Z_(j)' W r|| <= phi_j.
double kkt_max_violation(const LocalProblem& problem, const FitResult& fit,
                         const Eigen::VectorXd& phi);

inline constexpr double kInfPenalty = std::numeric_limits<double>::infinity();

}  // namespace lagr
