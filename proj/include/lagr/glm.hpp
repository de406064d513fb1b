#pragma once

#include <Eigen/Dense>

#include "lagr/solver.hpp"

// Local quasi-likelihood estimation for varying coefficient GLMs with
// canonical links, and the LAGR-penalized quasi-likelihood solver.

namespace lagr {

enum class FamilyName { Gaussian, Poisson, Binomial };

// Canonical-link family: eta = g(mu), dmu/deta = V(mu), quasi-score in eta is
// y - mu.
struct Family {
    FamilyName name = FamilyName::Gaussian;

    static Family make(FamilyName name) { return Family{name}; }

    double inv_link(double eta) const;
    double link(double mu) const;
    double variance(double mu) const;

    // Linear predictors are clamped before exponentiation: |eta| <= 30 for
    // binomial, eta <= 30 for poisson.
    double clamp_eta(double eta) const;

    // Quasi-likelihood Q(mu, y) (integral of (y-t)/V(t); additive constants
    // in y dropped).
    double quasi_loglik(double mu, double y) const;

    // Unit quasi-deviance 2{Q(y, y) - Q(mu, y)}, nonnegative, zero at mu = y.
    double deviance_unit(double mu, double y) const;

    void validate_response(double y) const;
    const char* label() const;
};

Family family_from_label(const std::string& label);

struct QEvaluation {
    double q1 = 0.0;  // dQ/deta = y - mu
    double q2 = 0.0;  // d2Q/deta2 = -V(mu)
    double mu = 0.0;
};

QEvaluation q_eval(const Family& family, double eta, double y);

// sum_i w_i Q(g^-1(Z_i' zeta), y_i)
double local_quasi_likelihood(const Eigen::VectorXd& zeta, const AugmentedDesign& design,
                              const WeightVector& W, const Eigen::VectorXd& y,
                              const Family& family);
double local_quasi_likelihood(const Eigen::VectorXd& zeta, const LocalProblem& problem,
                              const Family& family);

// Unpenalized local quasi-likelihood maximizer (Newton-Raphson with
// step-halving); the GLM pilot. Gaussian solves in one step and equals
// wls_fit.
LocalCoefficients fit_local_glm(const LocalProblem& problem, const Family& family,
                                double tol = 1e-10, int max_iter = 100);
LocalCoefficients fit_local_glm(const Dataset& dataset, const Location& s, BandwidthSpec bw,
                                const Family& family, double tol = 1e-10, int max_iter = 100);

// Penalized fit: outer iteratively reweighted quadratic surrogate (working
// response eta + q1/(-q2), working weight -q2 * w), inner blockwise descent;
// step-halving keeps -l* + P nonincreasing across accepted outer steps.
FitResult fit_lagr_glm_problem(const LocalProblem& problem, const Family& family,
                               const Eigen::VectorXd& phi, const LocalCoefficients& pilot,
                               double lambda_tag, double tol, int max_outer, int max_sweeps);
FitResult fit_lagr_glm(const Dataset& dataset, const Location& s, BandwidthSpec bw,
                       const Family& family, const PenaltySpec& spec, double tol = 1e-7,
                       int max_outer = 100, int max_sweeps = 10000);

// Quasi-score KKT residual at `fit` (GLM analog of kkt_max_violation).
double kkt_max_violation_glm(const LocalProblem& problem, const Family& family,
                             const FitResult& fit, const Eigen::VectorXd& phi);

}  // namespace lagr
