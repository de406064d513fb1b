#include "lagr/glm.hpp"

#include <cmath>

namespace lagr {

namespace {

constexpr double kEtaClamp = 30.0;

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

}  // namespace

double Family::inv_link(double eta) const {
    switch (name) {
        case FamilyName::Gaussian: return eta;
        case FamilyName::Poisson: return std::exp(std::min(eta, kEtaClamp));
        case FamilyName::Binomial: {
            const double e = clamp_eta(eta);
            return 1.0 / (1.0 + std::exp(-e));
        }
    }
    return eta;
}

double Family::link(double mu) const {
    switch (name) {
        case FamilyName::Gaussian: return mu;
        case FamilyName::Poisson: return std::log(mu);
        case FamilyName::Binomial: return std::log(mu / (1.0 - mu));
    }
    return mu;
}

double Family::variance(double mu) const {
    switch (name) {
        case FamilyName::Gaussian: return 1.0;
        case FamilyName::Poisson: return mu;
        case FamilyName::Binomial: return mu * (1.0 - mu);
    }
    return 1.0;
}

double Family::clamp_eta(double eta) const {
    switch (name) {
        case FamilyName::Gaussian: return eta;
        case FamilyName::Poisson: return std::min(eta, kEtaClamp);
        case FamilyName::Binomial: return std::clamp(eta, -kEtaClamp, kEtaClamp);
    }
    return eta;
}

double Family::quasi_loglik(double mu, double y) const {
    switch (name) {
        case FamilyName::Gaussian: return -0.5 * (y - mu) * (y - mu);
        case FamilyName::Poisson: return xlogy(y, mu) - mu;
        case FamilyName::Binomial: return xlogy(y, mu) + xlogy(1.0 - y, 1.0 - mu);
    }
    return 0.0;
}

double Family::deviance_unit(double mu, double y) const {
    switch (name) {
        case FamilyName::Gaussian: return (y - mu) * (y - mu);
        case FamilyName::Poisson: return 2.0 * (xlogy(y, y / mu) - (y - mu));
        case FamilyName::Binomial:
            return 2.0 * (xlogy(y, y / mu) + xlogy(1.0 - y, (1.0 - y) / (1.0 - mu)));
    }
    return 0.0;
}

void Family::validate_response(double y) const {
    if (!std::isfinite(y)) fail(ErrorKind::Input, "family response must be finite");
    switch (name) {
        case FamilyName::Gaussian: return;
        case FamilyName::Poisson:
            if (y < 0.0) fail(ErrorKind::Input, "poisson response must be nonnegative");
            return;
        case FamilyName::Binomial:
            if (y < 0.0 || y > 1.0)
                fail(ErrorKind::Input, "binomial response must lie in [0, 1]");
            return;
    }
}

const char* Family::label() const {
    switch (name) {
        case FamilyName::Gaussian: return "gaussian";
        case FamilyName::Poisson: return "poisson";
        case FamilyName::Binomial: return "binomial";
    }
    return "gaussian";
}

Family family_from_label(const std::string& label) {
    if (label == "gaussian") return Family::make(FamilyName::Gaussian);
    if (label == "poisson") return Family::make(FamilyName::Poisson);
    if (label == "binomial") return Family::make(FamilyName::Binomial);
    fail(ErrorKind::Config, "unknown family '" + label + "'");
}

QEvaluation q_eval(const Family& family, double eta, double y) {
    if (!std::isfinite(eta)) fail(ErrorKind::Input, "q_eval: eta must be finite");
    family.validate_response(y);
    QEvaluation q;
    q.mu = family.inv_link(eta);
    q.q1 = y - q.mu;
    q.q2 = -family.variance(q.mu);
    return q;
}

double local_quasi_likelihood(const Eigen::VectorXd& zeta, const LocalProblem& problem,
                              const Family& family) {
    const Eigen::VectorXd eta = problem.Z * zeta;
    double ll = 0.0;
    for (int i = 0; i < eta.size(); ++i)
        ll += problem.w[i] *
              family.quasi_loglik(family.inv_link(eta[i]), problem.y[i]);
    return ll;
}

double local_quasi_likelihood(const Eigen::VectorXd& zeta, const AugmentedDesign& design,
                              const WeightVector& W, const Eigen::VectorXd& y,
                              const Family& family) {
    if (zeta.size() != design.Z.cols() || y.size() != design.Z.rows() ||
        W.weights.size() != design.Z.rows())
        fail(ErrorKind::Input, "local_quasi_likelihood: dimension mismatch");
    const Eigen::VectorXd eta = design.Z * zeta;
    double ll = 0.0;
    for (int i = 0; i < eta.size(); ++i)
        ll += W.weights[i] * family.quasi_loglik(family.inv_link(eta[i]), y[i]);
    return ll;
}

namespace {

LocalCoefficients glm_start(const LocalProblem& problem, const Family& family) {
    LocalCoefficients zeta;
    zeta.layout = problem.layout;
    zeta.zeta = Eigen::VectorXd::Zero(problem.layout.n_coef());
    if (problem.layout.intercept_group >= 0) {
        double mean = (problem.w.array() * problem.y.array()).sum() / problem.w.sum();
        switch (family.name) {
            case FamilyName::Gaussian: break;
            case FamilyName::Poisson: mean = std::max(mean, 1e-3); break;
            case FamilyName::Binomial: mean = std::clamp(mean, 1e-3, 1.0 - 1e-3); break;
        }
        zeta.zeta[problem.layout.columns(problem.layout.intercept_group)[0]] =
            family.link(mean);
    }
    return zeta;
}

}  // namespace

LocalCoefficients fit_local_glm(const LocalProblem& problem, const Family& family,
                                double tol, int max_iter) {
    for (int i = 0; i < problem.y.size(); ++i) family.validate_response(problem.y[i]);

    const int m = static_cast<int>(problem.Z.rows());
    const int q = static_cast<int>(problem.Z.cols());
    if (m < q)
        fail(ErrorKind::DegenerateNeighborhood,
             "fit_local_glm: kernel support smaller than the coefficient count");

    LocalCoefficients zeta = glm_start(problem, family);
    double ll = local_quasi_likelihood(zeta.zeta, problem, family);
    const double scale = std::max(1.0, (problem.Z.transpose() *
                                        (problem.w.array() * problem.y.array()).matrix())
                                           .norm());

    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd eta = problem.Z * zeta.zeta;
        Eigen::VectorXd q1(m), vw(m);
        for (int i = 0; i < m; ++i) {
            const double mu = family.inv_link(eta[i]);
            q1[i] = problem.y[i] - mu;
            vw[i] = problem.w[i] * family.variance(mu);
        }
        const Eigen::VectorXd grad =
            problem.Z.transpose() * (problem.w.array() * q1.array()).matrix();
        if (grad.norm() <= tol * scale) return zeta;

        const Eigen::MatrixXd H = problem.Z.transpose() * vw.asDiagonal() * problem.Z;
        const Eigen::VectorXd step = solve_spd_system(H, grad, problem.layout);

        // Step-halving keeps the quasi-likelihood ascending (it is concave).
        double alpha = 1.0;
        bool accepted = false;
        for (int half = 0; half < 30; ++half) {
            const Eigen::VectorXd trial = zeta.zeta + alpha * step;
            const double ll_trial = local_quasi_likelihood(trial, problem, family);
            if (ll_trial >= ll - 1e-12 * (1.0 + std::abs(ll))) {
                zeta.zeta = trial;
                ll = ll_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            fail(ErrorKind::NonConvergence,
                 "fit_local_glm: step-halving exhausted without improving the "
                 "quasi-likelihood");
    }

    // Re-check the score at the last iterate before giving up.
    const Eigen::VectorXd eta = problem.Z * zeta.zeta;
    Eigen::VectorXd q1(m);
    for (int i = 0; i < m; ++i) q1[i] = problem.y[i] - family.inv_link(eta[i]);
    if ((problem.Z.transpose() * (problem.w.array() * q1.array()).matrix()).norm() <=
        tol * scale)
        return zeta;
    fail(ErrorKind::NonConvergence, "fit_local_glm: Newton iteration did not converge");
}

LocalCoefficients fit_local_glm(const Dataset& dataset, const Location& s, BandwidthSpec bw,
                                const Family& family, double tol, int max_iter) {
    return fit_local_glm(build_local_problem(dataset, s, bw), family, tol, max_iter);
}

FitResult fit_lagr_glm_problem(const LocalProblem& problem, const Family& family,
                               const Eigen::VectorXd& phi, const LocalCoefficients& pilot,
                               double lambda_tag, double tol, int max_outer,
                               int max_sweeps) {
    const GroupLayout layout = problem.layout;
    const int m = static_cast<int>(problem.Z.rows());

    FitResult result;
    result.lambda = lambda_tag;
    result.zeta_hat.layout = layout;
    result.zeta_hat.zeta = pilot.zeta;
    for (int j = 0; j < layout.p; ++j)
        if (std::isinf(phi[j])) result.zeta_hat.set_group(j, Eigen::Vector3d::Zero());

    const auto penalty = [&](const LocalCoefficients& z) {
        double pen = 0.0;
        for (int j = 0; j < layout.p; ++j) {
            const double norm = z.group_norm(j);
            if (norm == 0.0) continue;
            pen += (std::isinf(phi[j]) ? 0.0 : phi[j]) * norm;  // inf groups stay zero
        }
        return pen;
    };
    const auto objective = [&](const LocalCoefficients& z) {
        return -local_quasi_likelihood(z.zeta, problem, family) + penalty(z);
    };

    double obj = objective(result.zeta_hat);
    result.objective_trace.push_back(obj);
    result.converged = false;

    LocalProblem working = problem;  // same Z/layout, reweighted each outer pass
    int outer = 0;
    for (; outer < max_outer; ++outer) {
        const Eigen::VectorXd eta = problem.Z * result.zeta_hat.zeta;
        for (int i = 0; i < m; ++i) {
            const double mu = family.inv_link(eta[i]);
            const double v = family.variance(mu);
            working.w[i] = problem.w[i] * v;
            working.y[i] = eta[i] + (problem.y[i] - mu) / v;
        }

        const FitResult inner = solve_penalized_quadratic(working, phi, result.zeta_hat,
                                                          lambda_tag, tol, max_sweeps);

        // Step-halving toward the previous iterate on the true penalized
        // negative quasi-likelihood.
        LocalCoefficients candidate = inner.zeta_hat;
        double cand_obj = objective(candidate);
        bool accepted = cand_obj <= obj + 1e-12 * (1.0 + std::abs(obj));
        for (int half = 0; !accepted && half < 30; ++half) {
            candidate.zeta = 0.5 * (candidate.zeta + result.zeta_hat.zeta);
            cand_obj = objective(candidate);
            accepted = cand_obj <= obj + 1e-12 * (1.0 + std::abs(obj));
        }
        if (!accepted) break;  // no descent direction left; stop at the current iterate

        const double change =
            (candidate.zeta - result.zeta_hat.zeta).cwiseAbs().maxCoeff();
        result.zeta_hat = candidate;
        obj = std::min(cand_obj, obj);
        result.objective_trace.push_back(obj);
        if (change < tol) {
            result.converged = true;
            ++outer;
            break;
        }
    }
    result.iterations = outer;
    result.active.resize(layout.p);
    for (int j = 0; j < layout.p; ++j)
        result.active[j] = result.zeta_hat.group_norm(j) > 0.0;
    return result;
}

FitResult fit_lagr_glm(const Dataset& dataset, const Location& s, BandwidthSpec bw,
                       const Family& family, const PenaltySpec& spec, double tol,
                       int max_outer, int max_sweeps) {
    const LocalProblem problem = build_local_problem(dataset, s, bw);
    const LocalCoefficients pilot = fit_local_glm(problem, family);
    const AdaptiveWeights weights = adaptive_penalties(pilot, spec);
    return fit_lagr_glm_problem(problem, family, weights.phi, pilot, spec.lambda, tol,
                                max_outer, max_sweeps);
}

double kkt_max_violation_glm(const LocalProblem& problem, const Family& family,
                             const FitResult& fit, const Eigen::VectorXd& phi) {
    const GroupLayout layout = problem.layout;
    const int m = static_cast<int>(problem.Z.rows());
    const Eigen::VectorXd eta = problem.Z * fit.zeta_hat.zeta;
    Eigen::VectorXd wq1(m);
    for (int i = 0; i < m; ++i)
        wq1[i] = problem.w[i] * (problem.y[i] - family.inv_link(eta[i]));

    double scale = 1.0;
    double worst = 0.0;
    const Eigen::VectorXd score = problem.Z.transpose() * wq1;
    const Eigen::VectorXd yscore =
        problem.Z.transpose() * (problem.w.array() * problem.y.array()).matrix();
    for (int j = 0; j < layout.p; ++j) {
        const auto c = layout.columns(j);
        const Eigen::Vector3d gy{yscore[c[0]], yscore[c[1]], yscore[c[2]]};
        scale = std::max(scale, gy.norm());
    }
    for (int j = 0; j < layout.p; ++j) {
        const auto c = layout.columns(j);
        const Eigen::Vector3d g{score[c[0]], score[c[1]], score[c[2]]};
        const double norm = fit.zeta_hat.group_norm(j);
        double violation;
        if (norm > 0.0) {
            const double ph = std::isinf(phi[j]) ? 0.0 : phi[j];
            violation = (g - ph * fit.zeta_hat.group(j) / norm).norm();
        } else {
            violation = std::isinf(phi[j]) ? 0.0 : std::max(0.0, g.norm() - phi[j]);
        }
        worst = std::max(worst, violation);
    }
    return worst / scale;
}

}  // namespace lagr
