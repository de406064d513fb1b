#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "lagr/kernel.hpp"

// Locally linear augmented design and the unpenalized weighted least squares
// pilot fit.

namespace lagr {

struct Dataset {
    std::vector<Location> locations;          // length n
    Eigen::MatrixXd X;                        // n x p raw covariates
    Eigen::VectorXd y;                        // length n
    std::vector<std::string> covariate_names; // p labels
    bool intercept_included = false;          // column 0 is constant 1

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }

    void validate() const;

    // Copy with a constant-1 intercept column prepended (no-op when already
    // present); the intercept group is the one left unpenalized downstream.
    Dataset with_intercept() const;
};

// Group j owns columns {j, p+j, 2p+j} of Z: the raw covariate and its two
// location interactions.
struct GroupLayout {
    int p = 0;                 // number of groups
    int intercept_group = -1;  // unpenalized group index, -1 if none

    std::array<int, 3> columns(int j) const { return {j, p + j, 2 * p + j}; }
    bool penalized(int j) const { return j != intercept_group; }
    int n_coef() const { return 3 * p; }
};

struct AugmentedDesign {
    Eigen::MatrixXd Z;  // n x 3p, blocks [X | L(s)X | M(s)X]
    Location center;
    GroupLayout layout;
};

struct LocalCoefficients {
    Eigen::VectorXd zeta;  // length 3p
    GroupLayout layout;

    Eigen::Vector3d group(int j) const {
        const auto c = layout.columns(j);
        return {zeta[c[0]], zeta[c[1]], zeta[c[2]]};
    }
    double group_norm(int j) const { return group(j).norm(); }
    void set_group(int j, const Eigen::Vector3d& g) {
        const auto c = layout.columns(j);
        zeta[c[0]] = g[0];
        zeta[c[1]] = g[1];
        zeta[c[2]] = g[2];
    }
};

// Z_i = (1, u_i - u, v_i - v) (x) x_i', laid out blockwise.
AugmentedDesign augment(const Dataset& dataset, const Location& s);

// Minimizes (1/2)(y - Z zeta)' W (y - Z zeta). Ridge jitter
// 1e-10 tr(Z'WZ)/(3p) is added once if the Gram matrix is numerically
// singular; a second failure raises SingularDesign naming the groups whose
// diagonal blocks are degenerate.
LocalCoefficients wls_fit(const AugmentedDesign& design, const WeightVector& W,
                          const Eigen::VectorXd& y);

// Weighted residual mean square with an effective-sample correction:
// sum(w r^2) / (sum w - df_used * sum(w^2)/sum(w)).
double estimate_sigma2(const Eigen::VectorXd& residuals, const WeightVector& W, double df_used);

// Locally linear prediction sum_j x_j (beta_j + du * dbeta_u_j + dv * dbeta_v_j)
// with (du, dv) = at - center.
double predict(const LocalCoefficients& zeta, std::span<const double> x, const Location& at,
               const Location& center);

// Shared solve helper (also used by the penalized solvers): solves the SPD
// system G x = rhs under the jitter policy above. `layout` is only used to
// name offending groups in the error message.
Eigen::VectorXd solve_spd_system(const Eigen::MatrixXd& G, const Eigen::VectorXd& rhs,
                                 const GroupLayout& layout);

}  // namespace lagr
