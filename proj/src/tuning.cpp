#include "lagr/tuning.hpp"

#include <cmath>

#include "lagr/simd.hpp"

namespace lagr {

namespace {

// Pilot through the family's machinery (gaussian = WLS).
LocalCoefficients family_pilot(const LocalProblem& problem, const Family& family) {
    if (family.name == FamilyName::Gaussian) return pilot_fit(problem);
    return fit_local_glm(problem, family);
}

// Intercept-adjusted quasi-score correlations ||Z_(j)' (w . q1(eta0))|| used
// for the lambda_max bound. For gaussian this is Z_(j)' W (y - Z0 zeta0).
Eigen::VectorXd zero_bound_correlations(const LocalProblem& problem, const Family& family) {
    const GroupLayout layout = problem.layout;
    const int m = static_cast<int>(problem.Z.rows());

    LocalCoefficients base;
    base.layout = layout;
    base.zeta = Eigen::VectorXd::Zero(layout.n_coef());
    if (layout.intercept_group >= 0) {
        // Intercept-group-only fit with every penalized group at zero.
        const auto c = layout.columns(layout.intercept_group);
        Eigen::MatrixXd Z0(m, 3);
        for (int a = 0; a < 3; ++a) Z0.col(a) = problem.Z.col(c[a]);
        if (family.name == FamilyName::Gaussian) {
            const Eigen::MatrixXd G =
                Z0.transpose() * problem.w.asDiagonal() * Z0;
            const Eigen::VectorXd rhs =
                Z0.transpose() * (problem.w.array() * problem.y.array()).matrix();
            GroupLayout single{1, 0};
            const Eigen::VectorXd sol = solve_spd_system(G, rhs, single);
            for (int a = 0; a < 3; ++a) base.zeta[c[a]] = sol[a];
        } else {
            LocalProblem intercept_only;
            intercept_only.Z = Z0;
            intercept_only.w = problem.w;
            intercept_only.y = problem.y;
            intercept_only.layout = GroupLayout{1, 0};
            intercept_only.center = problem.center;
            intercept_only.n_total = problem.n_total;
            const LocalCoefficients sol = fit_local_glm(intercept_only, family);
            for (int a = 0; a < 3; ++a) base.zeta[c[a]] = sol.zeta[a];
        }
    }

    const Eigen::VectorXd eta = problem.Z * base.zeta;
    Eigen::VectorXd wq1(m);
    for (int i = 0; i < m; ++i)
        wq1[i] = problem.w[i] * (problem.y[i] - family.inv_link(eta[i]));
    const Eigen::VectorXd score = problem.Z.transpose() * wq1;

    Eigen::VectorXd out(layout.p);
    for (int j = 0; j < layout.p; ++j) {
        const auto c = layout.columns(j);
        out[j] = Eigen::Vector3d(score[c[0]], score[c[1]], score[c[2]]).norm();
    }
    return out;
}

FitResult fit_at_lambda(const LocalProblem& problem, const Family& family,
                        const LocalCoefficients& pilot, double lambda, double gamma,
                        const LocalCoefficients& init, double tol, int max_sweeps,
                        int max_outer) {
    const AdaptiveWeights weights = adaptive_penalties(pilot, PenaltySpec{lambda, gamma});
    if (family.name == FamilyName::Gaussian)
        return solve_penalized_quadratic(problem, weights.phi, init, lambda, tol, max_sweeps);
    return fit_lagr_glm_problem(problem, family, weights.phi, init, lambda, tol, max_outer,
                                max_sweeps);
}

}  // namespace

double df_hat(const FitResult& fit, const LocalCoefficients& pilot, int d) {
    const GroupLayout layout = fit.zeta_hat.layout;
    double df = 0.0;
    for (int j = 0; j < layout.p; ++j) {
        if (!layout.penalized(j)) {
            df += 3.0;  // the unpenalized intercept group contributes its 3 parameters
            continue;
        }
        const double norm = fit.zeta_hat.group_norm(j);
        if (norm == 0.0) continue;
        const double pilot_norm = pilot.group_norm(j);
        if (pilot_norm == 0.0)
            fail(ErrorKind::Numerical,
                 "df_hat: active group with a zero pilot norm (adaptive penalties should "
                 "have pinned it at zero)");
        df += 1.0 + d * std::min(1.0, norm / pilot_norm);
    }
    return df;
}

AicRecord aic_record(const LocalProblem& problem, FitResult fit,
                     const LocalCoefficients& pilot, double sigma2, const Family& family,
                     int d) {
    const int m = static_cast<int>(problem.Z.rows());
    AicRecord rec;
    rec.lambda = fit.lambda;
    rec.df_hat = df_hat(fit, pilot, d);
    if (family.name == FamilyName::Gaussian) {
        if (!(sigma2 > 0.0))
            fail(ErrorKind::Config, "aic: sigma2 must be positive for the gaussian family");
        Eigen::VectorXd r = problem.y - problem.Z * fit.zeta_hat.zeta;
        rec.weighted_deviance =
            simd::ops().wsumsq(problem.w.data(), r.data(), m) / sigma2;
    } else {
        const Eigen::VectorXd eta = problem.Z * fit.zeta_hat.zeta;
        double dev = 0.0;
        for (int i = 0; i < m; ++i)
            dev += problem.w[i] * family.deviance_unit(family.inv_link(eta[i]), problem.y[i]);
        rec.weighted_deviance = dev;
    }
    rec.aic = rec.weighted_deviance + 2.0 * rec.df_hat;
    rec.fit = std::move(fit);
    return rec;
}

TuningGrid build_tuning_grid(const LocalProblem& problem, const LocalCoefficients& pilot,
                             double gamma, const GridSpec& spec, const Family& family,
                             double tol, int max_sweeps) {
    if (spec.n_points < 1) fail(ErrorKind::Config, "tuning grid needs at least one point");
    if (!(spec.ratio > 0.0) || spec.ratio > 1.0)
        fail(ErrorKind::Config, "tuning grid ratio must lie in (0, 1]");

    const GroupLayout layout = problem.layout;
    const Eigen::VectorXd corr = zero_bound_correlations(problem, family);
    double lambda_max = 0.0;
    for (int j = 0; j < layout.p; ++j) {
        if (!layout.penalized(j)) continue;
        const double norm = pilot.group_norm(j);
        if (norm == 0.0) continue;  // infinite penalty at any lambda
        lambda_max = std::max(lambda_max, corr[j] * std::pow(norm, gamma));
    }
    lambda_max = std::max(lambda_max, 1e-12);

    TuningGrid grid;
    grid.lambdas.resize(spec.n_points);
    if (spec.n_points == 1) {
        grid.lambdas[0] = lambda_max;
    } else {
        const double lstep = std::log(spec.ratio) / (spec.n_points - 1);
        for (int k = 0; k < spec.n_points; ++k)
            grid.lambdas[k] = lambda_max * std::exp(lstep * k);
    }

    // lambda_max must zero every penalized group (KKT bound is exact for the
    // gaussian family; verified for all).
    const FitResult check = fit_at_lambda(problem, family, pilot, lambda_max, gamma, pilot,
                                          tol, max_sweeps, 100);
    for (int j = 0; j < layout.p; ++j)
        if (layout.penalized(j) && check.active[j])
            fail(ErrorKind::Numerical,
                 "build_tuning_grid: lambda_max failed to zero penalized group " +
                     std::to_string(j));
    return grid;
}

SelectionResult select_lambda(const LocalProblem& problem, double gamma, const GridSpec& spec,
                              const Family& family, double tol, int max_sweeps,
                              int max_outer) {
    SelectionResult result;
    result.pilot = family_pilot(problem, family);

    if (family.name == FamilyName::Gaussian) {
        Eigen::VectorXd r = problem.y - problem.Z * result.pilot.zeta;
        WeightVector wv;
        wv.weights = problem.w;
        wv.support_count = static_cast<int>(problem.w.size());
        wv.bandwidth_used = problem.bandwidth_used;
        result.sigma2 = estimate_sigma2(r, wv, static_cast<double>(problem.layout.n_coef()));
        if (result.sigma2 <= 0.0) result.sigma2 = 1.0;  // all-zero residuals: scale-free
    }

    const TuningGrid grid =
        build_tuning_grid(problem, result.pilot, gamma, spec, family, tol, max_sweeps);

    LocalCoefficients warm = result.pilot;
    bool have_best = false;
    std::size_t failures = 0;
    std::string first_error;
    for (double lambda : grid.lambdas) {
        try {
            FitResult fit = fit_at_lambda(problem, family, result.pilot, lambda, gamma, warm,
                                          tol, max_sweeps, max_outer);
            warm = fit.zeta_hat;
            AicRecord rec = aic_record(problem, std::move(fit), result.pilot, result.sigma2,
                                       family);
            if (!have_best || rec.aic < result.best.aic) {
                result.best = rec;
                have_best = true;
            }
            result.path.push_back(std::move(rec));
        } catch (const Error& e) {
            ++failures;
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!have_best)
        fail(ErrorKind::Tuning,
             "select_lambda: every fit on the tuning path failed (" +
                 std::to_string(failures) + " of " + std::to_string(grid.lambdas.size()) +
                 "; first: " + first_error + ")");
    return result;
}

SelectionResult select_lambda(const Dataset& dataset, const Location& s, BandwidthSpec bw,
                              double gamma, const GridSpec& spec, const Family& family,
                              double tol, int max_sweeps, int max_outer) {
    return select_lambda(build_local_problem(dataset, s, bw), gamma, spec, family, tol,
                         max_sweeps, max_outer);
}

RateReport validate_lambda_rate(int n, double lambda, double gamma) {
    if (n < 2) fail(ErrorKind::Input, "validate_lambda_rate: n must be >= 2");
    if (!(lambda > 0.0)) fail(ErrorKind::Input, "validate_lambda_rate: lambda must be positive");
    RateReport report;
    report.alpha = std::log(lambda) / std::log(static_cast<double>(n));
    report.lower = (2.0 - gamma) / 3.0;
    report.upper = 1.0 / 3.0;
    report.gamma_ok = gamma > 1.0;
    if (!report.gamma_ok) {
        report.inside = false;
        report.note =
            "the rate window ((2-gamma)/3, 1/3) is empty for gamma <= 1; the LAGR oracle "
            "property needs gamma > 1";
        return report;
    }
    report.inside = report.alpha > report.lower && report.alpha < report.upper;
    report.note = report.inside ? "lambda is inside the n^alpha oracle window"
                                : "lambda is outside the n^alpha oracle window (advisory)";
    return report;
}

}  // namespace lagr
