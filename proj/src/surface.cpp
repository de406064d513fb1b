#include "lagr/surface.hpp"

#include "lagr/parallel.hpp"

namespace lagr {

namespace {

LocationFit fit_one(const Dataset& dataset, const Location& s, const SurfaceOptions& opt) {
    LocationFit out;
    out.s = s;
    try {
        const LocalProblem problem = build_local_problem(dataset, s, opt.bw, opt.kernel);
        out.bandwidth_used = problem.bandwidth_used;

        if (opt.fixed_lambda.has_value()) {
            const PenaltySpec spec{*opt.fixed_lambda, opt.gamma};
            if (opt.family.name == FamilyName::Gaussian) {
                out.pilot = pilot_fit(problem);
                const AdaptiveWeights weights = adaptive_penalties(out.pilot, spec);
                out.fit = solve_penalized_quadratic(problem, weights.phi, out.pilot,
                                                    spec.lambda, opt.tol, opt.max_sweeps);
                Eigen::VectorXd r = problem.y - problem.Z * out.pilot.zeta;
                WeightVector wv;
                wv.weights = problem.w;
                wv.support_count = static_cast<int>(problem.w.size());
                wv.bandwidth_used = problem.bandwidth_used;
                out.sigma2 =
                    estimate_sigma2(r, wv, static_cast<double>(problem.layout.n_coef()));
                if (out.sigma2 <= 0.0) out.sigma2 = 1.0;
            } else {
                out.pilot = fit_local_glm(problem, opt.family);
                const AdaptiveWeights weights = adaptive_penalties(out.pilot, spec);
                out.fit = fit_lagr_glm_problem(problem, opt.family, weights.phi, out.pilot,
                                               spec.lambda, opt.tol, opt.max_outer,
                                               opt.max_sweeps);
            }
            const AicRecord rec = aic_record(problem, out.fit, out.pilot, out.sigma2,
                                             opt.family);
            out.df_hat = rec.df_hat;
            out.weighted_deviance = rec.weighted_deviance;
            out.aic = rec.aic;
        } else {
            SelectionResult sel = select_lambda(problem, opt.gamma, opt.grid, opt.family,
                                                opt.tol, opt.max_sweeps, opt.max_outer);
            out.pilot = sel.pilot;
            out.sigma2 = sel.sigma2;
            out.df_hat = sel.best.df_hat;
            out.weighted_deviance = sel.best.weighted_deviance;
            out.aic = sel.best.aic;
            out.path.reserve(sel.path.size());
            for (const AicRecord& rec : sel.path)
                out.path.push_back({rec.lambda, rec.df_hat, rec.weighted_deviance, rec.aic});
            out.fit = std::move(sel.best.fit);
        }
        out.ok = true;
    } catch (const Error& e) {
        out.ok = false;
        out.error = e.what();
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = std::string("unexpected: ") + e.what();
    }
    return out;
}

}  // namespace

CoefficientSurface fit_surface(const Dataset& dataset, std::span<const Location> eval_points,
                               const SurfaceOptions& options) {
    if (eval_points.empty()) fail(ErrorKind::Input, "fit_surface: no evaluation points");
    const Dataset fitted = dataset.with_intercept();
    fitted.validate();

    CoefficientSurface surface;
    surface.layout.p = fitted.p();
    surface.layout.intercept_group = 0;
    surface.names = fitted.covariate_names;
    surface.fits.resize(eval_points.size());

    parallel_for(static_cast<int>(eval_points.size()), options.workers, [&](int i) {
        surface.fits[i] = fit_one(fitted, eval_points[i], options);
    });
    return surface;
}

}  // namespace lagr
