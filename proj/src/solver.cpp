#include "lagr/solver.hpp"

#include <cmath>

#include "lagr/simd.hpp"

namespace lagr {

namespace {

// Eigen-decomposed 3x3 Gram block of one covariate group.
struct GroupBlock {
    Eigen::Matrix3d A;
    Eigen::Matrix3d Q;       // eigenvectors
    Eigen::Vector3d evals;   // ascending, clamped at 0
    double emax = 0.0;
};

GroupBlock decompose_block(const Eigen::Matrix3d& A) {
    GroupBlock blk;
    blk.A = A;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(A);
    blk.Q = eig.eigenvectors();
    blk.evals = eig.eigenvalues();
    blk.emax = blk.evals.maxCoeff();
    const double tol = 1e-12 * std::max(1.0, blk.emax);
    if (blk.evals.minCoeff() < -tol)
        fail(ErrorKind::Numerical, "group_update: block Gram matrix is indefinite");
    blk.evals = blk.evals.cwiseMax(0.0);
    return blk;
}

// argmin (1/2) g'Ag - b'g + phi ||g|| given A = Q diag(a) Q'.
Eigen::Vector3d block_argmin(const GroupBlock& blk, const Eigen::Vector3d& b, double phi) {
    const double eig_tol = 1e-12 * std::max(1.0, blk.emax);
    Eigen::Vector3d c = blk.Q.transpose() * b;

    if (phi <= 0.0) {
        // Unpenalized: pseudo-inverse solve (null components dropped).
        Eigen::Vector3d x;
        for (int k = 0; k < 3; ++k) x[k] = blk.evals[k] > eig_tol ? c[k] / blk.evals[k] : 0.0;
        return blk.Q * x;
    }
    if (std::isinf(phi)) return Eigen::Vector3d::Zero();

    // Null-space components of b are zero in exact arithmetic (b = Z'Wr);
    // drop the roundoff so the secular equation stays well posed.
    for (int k = 0; k < 3; ++k)
        if (blk.evals[k] <= eig_tol) c[k] = 0.0;
    const double nb = c.norm();
    if (nb <= phi) return Eigen::Vector3d::Zero();

    // Nonzero minimizer satisfies (A + (phi/t) I) g = b with t = ||g||, i.e.
    // psi(t) = ||(A + (phi/t) I)^-1 b|| = t. psi(t)/t is strictly decreasing,
    // so the root is unique; bracket it and run safeguarded Newton.
    const auto psi = [&](double t) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double d = blk.evals[k] + phi / t;
            s += (c[k] / d) * (c[k] / d);
        }
        return std::sqrt(s);
    };
    double lo = (nb - phi) / (blk.emax + phi);  // psi(lo) >= lo
    while (psi(lo) < lo) lo *= 0.5;
    double hi = std::max(lo * 2.0, nb * nb / phi);  // generous; expand if needed
    for (int it = 0; psi(hi) > hi; ++it) {
        hi *= 2.0;
        if (it > 200) fail(ErrorKind::Numerical, "group_update: secular bracket expansion failed");
    }

    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double pt = psi(t);
        const double g = pt - t;
        if (std::abs(g) <= 1e-12 * std::max(1.0, t)) break;
        if (g > 0.0)
            lo = t;
        else
            hi = t;
        // Newton step on psi(t) - t; fall back to bisection when it escapes.
        double num = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double d = blk.evals[k] + phi / t;
            num += c[k] * c[k] / (d * d * d);
        }
        const double dpsi = (phi / (t * t)) * num / pt;
        double tn = t - g / (dpsi - 1.0);
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        t = tn;
        if (hi - lo <= 1e-15 * hi) break;
    }

    Eigen::Vector3d x;
    for (int k = 0; k < 3; ++k) x[k] = c[k] / (blk.evals[k] + phi / t);
    return blk.Q * x;
}

double group_objective_terms(const Eigen::VectorXd& zeta, const GroupLayout& layout,
                             const Eigen::VectorXd& phi) {
    double pen = 0.0;
    for (int j = 0; j < layout.p; ++j) {
        const auto c = layout.columns(j);
        const double norm = std::sqrt(zeta[c[0]] * zeta[c[0]] + zeta[c[1]] * zeta[c[1]] +
                                      zeta[c[2]] * zeta[c[2]]);
        if (norm == 0.0) continue;
        if (std::isinf(phi[j])) return kInfPenalty;
        pen += phi[j] * norm;
    }
    return pen;
}

}  // namespace

AdaptiveWeights adaptive_penalties(const LocalCoefficients& pilot, const PenaltySpec& spec) {
    if (!(spec.gamma > 1.0))
        fail(ErrorKind::Config,
             "adaptive_penalties: gamma must exceed 1 (= d/2 with d = 2) for the oracle "
             "property; got " + std::to_string(spec.gamma));
    if (spec.lambda < 0.0)
        fail(ErrorKind::Config, "adaptive_penalties: lambda must be nonnegative");
    if (!pilot.zeta.allFinite())
        fail(ErrorKind::Input, "adaptive_penalties: non-finite pilot coefficients");

    const int p = pilot.layout.p;
    AdaptiveWeights out;
    out.phi.resize(p);
    out.source_norms.resize(p);
    for (int j = 0; j < p; ++j) {
        const double norm = pilot.group_norm(j);
        out.source_norms[j] = norm;
        if (!pilot.layout.penalized(j) || spec.lambda == 0.0)
            out.phi[j] = 0.0;
        else
            out.phi[j] = norm == 0.0 ? kInfPenalty
                                     : spec.lambda * std::pow(norm, -spec.gamma);
    }
    return out;
}

double lagr_objective(const Eigen::VectorXd& zeta, const AugmentedDesign& design,
                      const WeightVector& W, const Eigen::VectorXd& y,
                      const AdaptiveWeights& phi) {
    if (zeta.size() != design.Z.cols() || y.size() != design.Z.rows() ||
        W.weights.size() != design.Z.rows())
        fail(ErrorKind::Input, "lagr_objective: dimension mismatch");
    const Eigen::VectorXd r = y - design.Z * zeta;
    const double quad = 0.5 * (W.weights.array() * r.array().square()).sum();
    const double pen = group_objective_terms(zeta, design.layout, phi.phi);
    return quad + pen;
}

Eigen::Vector3d group_update(const Eigen::Matrix3d& A, const Eigen::Vector3d& b, double phi) {
    if (!b.allFinite()) fail(ErrorKind::Input, "group_update: non-finite correlation vector");
    if (phi < 0.0) fail(ErrorKind::Input, "group_update: negative penalty");
    return block_argmin(decompose_block(A), b, phi);
}

LocalProblem build_local_problem(const Dataset& dataset, const Location& s, BandwidthSpec bw,
                                 KernelSpec kernel) {
    const WeightVector W = local_weights(s, dataset.locations, bw, kernel);
    const AugmentedDesign design = augment(dataset, s);

    LocalProblem prob;
    prob.layout = design.layout;
    prob.center = s;
    prob.bandwidth_used = W.bandwidth_used;
    prob.n_total = dataset.n();
    prob.rows.reserve(W.support_count);
    for (int i = 0; i < dataset.n(); ++i)
        if (W.weights[i] > 0.0) prob.rows.push_back(i);
    const int m = static_cast<int>(prob.rows.size());
    prob.Z.resize(m, design.Z.cols());
    prob.w.resize(m);
    prob.y.resize(m);
    for (int k = 0; k < m; ++k) {
        prob.Z.row(k) = design.Z.row(prob.rows[k]);
        prob.w[k] = W.weights[prob.rows[k]];
        prob.y[k] = dataset.y[prob.rows[k]];
    }
    return prob;
}

LocalCoefficients pilot_fit(const LocalProblem& problem) {
    const int m = static_cast<int>(problem.Z.rows());
    const int q = static_cast<int>(problem.Z.cols());
    if (m < q)
        fail(ErrorKind::DegenerateNeighborhood,
             "pilot_fit: kernel support (" + std::to_string(m) +
                 " observations) smaller than the coefficient count (" + std::to_string(q) +
                 ")");
    const auto& ops = simd::ops();
    Eigen::MatrixXd G(q, q);
    Eigen::VectorXd rhs(q);
    for (int a = 0; a < q; ++a) {
        for (int b = a; b < q; ++b) {
            G(a, b) = G(b, a) = ops.wdot(problem.w.data(), problem.Z.col(a).data(),
                                         problem.Z.col(b).data(), m);
        }
        rhs[a] = ops.wdot(problem.w.data(), problem.Z.col(a).data(), problem.y.data(), m);
    }
    LocalCoefficients out;
    out.layout = problem.layout;
    out.zeta = solve_spd_system(G, rhs, problem.layout);
    return out;
}

FitResult solve_penalized_quadratic(const LocalProblem& problem, const Eigen::VectorXd& phi,
                                    const LocalCoefficients& init, double lambda_tag,
                                    double tol, int max_sweeps) {
    const auto& ops = simd::ops();
    const GroupLayout layout = problem.layout;
    const int p = layout.p;
    const int m = static_cast<int>(problem.Z.rows());

    FitResult result;
    result.lambda = lambda_tag;
    result.zeta_hat.layout = layout;
    result.zeta_hat.zeta = init.zeta;
    for (int j = 0; j < p; ++j)
        if (std::isinf(phi[j])) result.zeta_hat.set_group(j, Eigen::Vector3d::Zero());

    if ((phi.array() == 0.0).all()) {
        // Objective coincides with the plain weighted least squares; its
        // unique minimizer is the pilot solve, no descent needed.
        result.zeta_hat = pilot_fit(problem);
        Eigen::VectorXd r = problem.y - problem.Z * result.zeta_hat.zeta;
        result.objective_trace = {0.5 * ops.wsumsq(problem.w.data(), r.data(), m)};
        result.iterations = 0;
        result.converged = true;
        result.active.resize(p);
        for (int j = 0; j < p; ++j) result.active[j] = result.zeta_hat.group_norm(j) > 0.0;
        return result;
    }

    // Per-group Gram blocks are constant across sweeps.
    std::vector<GroupBlock> blocks(p);
    for (int j = 0; j < p; ++j) {
        if (std::isinf(phi[j])) continue;  // group removed from the descent
        const auto c = layout.columns(j);
        Eigen::Matrix3d A;
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b)
                A(a, b) = A(b, a) = ops.wdot(problem.w.data(), problem.Z.col(c[a]).data(),
                                             problem.Z.col(c[b]).data(), m);
        blocks[j] = decompose_block(A);
    }

    // Sweep order: intercept group first, then the penalized groups cyclically.
    std::vector<int> order;
    order.reserve(p);
    if (layout.intercept_group >= 0) order.push_back(layout.intercept_group);
    for (int j = 0; j < p; ++j)
        if (j != layout.intercept_group && !std::isinf(phi[j])) order.push_back(j);

    Eigen::VectorXd r = problem.y - problem.Z * result.zeta_hat.zeta;
    const auto objective = [&]() {
        return 0.5 * ops.wsumsq(problem.w.data(), r.data(), m) +
               group_objective_terms(result.zeta_hat.zeta, layout, phi);
    };

    result.objective_trace.push_back(objective());
    result.converged = false;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (int j : order) {
            const auto c = layout.columns(j);
            const Eigen::Vector3d old = result.zeta_hat.group(j);
            Eigen::Vector3d g;
            for (int a = 0; a < 3; ++a)
                g[a] = ops.wdot(problem.w.data(), problem.Z.col(c[a]).data(), r.data(), m);
            const Eigen::Vector3d b = g + blocks[j].A * old;
            const Eigen::Vector3d next = block_argmin(blocks[j], b, phi[j]);
            const Eigen::Vector3d delta = next - old;
            if (delta.cwiseAbs().maxCoeff() == 0.0) continue;
            for (int a = 0; a < 3; ++a)
                if (delta[a] != 0.0)
                    ops.axpy(-delta[a], problem.Z.col(c[a]).data(), r.data(), m);
            result.zeta_hat.set_group(j, next);
            max_change = std::max(max_change, delta.cwiseAbs().maxCoeff());
        }
        double obj = objective();
        const double prev = result.objective_trace.back();
        // Exact block argmins cannot increase the objective; clamp pure
        // roundoff so the recorded trace honors the invariant.
        if (obj > prev && obj - prev <= 1e-9 * (1.0 + std::abs(prev))) obj = prev;
        result.objective_trace.push_back(obj);
        if (max_change < tol) {
            result.converged = true;
            ++sweep;
            break;
        }
    }
    result.iterations = sweep;
    result.active.resize(p);
    for (int j = 0; j < p; ++j) result.active[j] = result.zeta_hat.group_norm(j) > 0.0;
    return result;
}

FitResult fit_lagr(const Dataset& dataset, const Location& s, BandwidthSpec bw,
                   const PenaltySpec& spec, double tol, int max_sweeps) {
    const LocalProblem problem = build_local_problem(dataset, s, bw);
    const LocalCoefficients pilot = pilot_fit(problem);
    const AdaptiveWeights weights = adaptive_penalties(pilot, spec);
    return solve_penalized_quadratic(problem, weights.phi, pilot, spec.lambda, tol, max_sweeps);
}

double kkt_max_violation(const LocalProblem& problem, const FitResult& fit,
                         const Eigen::VectorXd& phi) {
    const auto& ops = simd::ops();
    const GroupLayout layout = problem.layout;
    const int m = static_cast<int>(problem.Z.rows());
    Eigen::VectorXd r = problem.y - problem.Z * fit.zeta_hat.zeta;

    double scale = 1.0;
    for (int j = 0; j < layout.p; ++j) {
        const auto c = layout.columns(j);
        Eigen::Vector3d gy;
        for (int a = 0; a < 3; ++a)
            gy[a] = ops.wdot(problem.w.data(), problem.Z.col(c[a]).data(), problem.y.data(), m);
        scale = std::max(scale, gy.norm());
    }

    double worst = 0.0;
    for (int j = 0; j < layout.p; ++j) {
        const auto c = layout.columns(j);
        Eigen::Vector3d g;
        for (int a = 0; a < 3; ++a)
            g[a] = ops.wdot(problem.w.data(), problem.Z.col(c[a]).data(), r.data(), m);
        const double norm = fit.zeta_hat.group_norm(j);
        double violation;
        if (norm > 0.0) {
            const double ph = std::isinf(phi[j]) ? 0.0 : phi[j];  // inf groups are zero
            violation = (g - ph * fit.zeta_hat.group(j) / norm).norm();
        } else {
            violation = std::isinf(phi[j]) ? 0.0 : std::max(0.0, g.norm() - phi[j]);
        }
        worst = std::max(worst, violation);
    }
    return worst / scale;
}

}  // namespace lagr
