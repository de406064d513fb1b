#include "lagr/design.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace lagr {

void Dataset::validate() const {
    const int rows = n();
    if (rows < 1) fail(ErrorKind::Input, "Dataset: needs at least one observation");
    if (static_cast<int>(locations.size()) != rows || y.size() != rows)
        fail(ErrorKind::Input, "Dataset: locations/X/y row counts disagree");
    if (static_cast<int>(covariate_names.size()) != p())
        fail(ErrorKind::Input, "Dataset: covariate_names does not match X columns");
    std::set<std::string> seen(covariate_names.begin(), covariate_names.end());
    if (static_cast<int>(seen.size()) != p())
        fail(ErrorKind::Input, "Dataset: covariate names must be unique");
    for (const Location& s : locations)
        if (!std::isfinite(s.u) || !std::isfinite(s.v))
            fail(ErrorKind::Input, "Dataset: non-finite location");
    if (!X.allFinite() || !y.allFinite())
        fail(ErrorKind::Input, "Dataset: non-finite covariate or response value");
    if (intercept_included) {
        if (p() < 1 || (X.col(0).array() != 1.0).any())
            fail(ErrorKind::Input, "Dataset: intercept column must be constant 1");
    }
}

Dataset Dataset::with_intercept() const {
    if (intercept_included) return *this;
    Dataset out;
    out.locations = locations;
    out.y = y;
    out.X.resize(n(), p() + 1);
    out.X.col(0).setOnes();
    out.X.rightCols(p()) = X;
    out.covariate_names.reserve(covariate_names.size() + 1);
    out.covariate_names.push_back("(intercept)");
    out.covariate_names.insert(out.covariate_names.end(), covariate_names.begin(),
                               covariate_names.end());
    out.intercept_included = true;
    return out;
}

AugmentedDesign augment(const Dataset& dataset, const Location& s) {
    dataset.validate();
    const int n = dataset.n();
    const int p = dataset.p();
    AugmentedDesign design;
    design.center = s;
    design.layout.p = p;
    design.layout.intercept_group = dataset.intercept_included ? 0 : -1;
    design.Z.resize(n, 3 * p);
    design.Z.leftCols(p) = dataset.X;
    for (int i = 0; i < n; ++i) {
        const double du = dataset.locations[i].u - s.u;
        const double dv = dataset.locations[i].v - s.v;
        design.Z.block(i, p, 1, p) = dataset.X.row(i) * du;
        design.Z.block(i, 2 * p, 1, p) = dataset.X.row(i) * dv;
    }
    return design;
}

Eigen::VectorXd solve_spd_system(const Eigen::MatrixXd& G, const Eigen::VectorXd& rhs,
                                 const GroupLayout& layout) {
    const int m = static_cast<int>(G.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
    const double emax = eig.eigenvalues().maxCoeff();
    const double emin = eig.eigenvalues().minCoeff();
    const double tol = 1e-12 * std::max(emax, 1.0);
    if (emin > tol) return eig.eigenvectors() *
                           (eig.eigenvectors().transpose() * rhs).cwiseQuotient(
                               eig.eigenvalues());

    const double jitter = 1e-10 * G.trace() / m;
    Eigen::MatrixXd Gj = G;
    Gj.diagonal().array() += jitter;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig2(Gj);
    if (eig2.eigenvalues().minCoeff() > 1e-12 * std::max(eig2.eigenvalues().maxCoeff(), 1.0))
        return eig2.eigenvectors() *
               (eig2.eigenvectors().transpose() * rhs).cwiseQuotient(eig2.eigenvalues());

    // Identify which covariate groups carry the degeneracy for the message.
    std::ostringstream os;
    os << "singular local design (Z'WZ rank-deficient beyond jitter); degenerate group(s):";
    bool any = false;
    for (int j = 0; j < layout.p; ++j) {
        const auto c = layout.columns(j);
        Eigen::Matrix3d block;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) block(a, b) = G(c[a], c[b]);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> be(block);
        if (be.eigenvalues().minCoeff() <=
            1e-10 * std::max(1.0, be.eigenvalues().maxCoeff())) {
            os << ' ' << j;
            any = true;
        }
    }
    if (!any) os << " (cross-group collinearity)";
    fail(ErrorKind::SingularDesign, os.str());
}

LocalCoefficients wls_fit(const AugmentedDesign& design, const WeightVector& W,
                          const Eigen::VectorXd& y) {
    const int n = static_cast<int>(design.Z.rows());
    if (W.weights.size() != n || y.size() != n)
        fail(ErrorKind::Input, "wls_fit: dimension mismatch");
    if (W.support_count == 0 || W.weights.maxCoeff() <= 0.0)
        fail(ErrorKind::DegenerateNeighborhood, "wls_fit: zero effective sample");

    const Eigen::MatrixXd WZ = W.weights.asDiagonal() * design.Z;
    const Eigen::MatrixXd G = design.Z.transpose() * WZ;
    const Eigen::VectorXd rhs = WZ.transpose() * y;
    LocalCoefficients out;
    out.layout = design.layout;
    out.zeta = solve_spd_system(G, rhs, design.layout);
    return out;
}

double estimate_sigma2(const Eigen::VectorXd& residuals, const WeightVector& W,
                       double df_used) {
    if (residuals.size() != W.weights.size())
        fail(ErrorKind::Input, "estimate_sigma2: dimension mismatch");
    const double sw = W.weights.sum();
    if (!(sw > 0.0)) fail(ErrorKind::DegenerateNeighborhood, "estimate_sigma2: zero weights");
    const double sw2 = W.weights.squaredNorm();
    const double denom = sw - df_used * (sw2 / sw);
    if (!(denom > 0.0))
        fail(ErrorKind::DegenerateNeighborhood,
             "estimate_sigma2: effective sample too small for the degrees of freedom used");
    const double ss = (W.weights.array() * residuals.array().square()).sum();
    return ss / denom;
}

double predict(const LocalCoefficients& zeta, std::span<const double> x, const Location& at,
               const Location& center) {
    const int p = zeta.layout.p;
    if (static_cast<int>(x.size()) != p)
        fail(ErrorKind::Input, "predict: covariate row length does not match the layout");
    const double du = at.u - center.u;
    const double dv = at.v - center.v;
    double eta = 0.0;
    for (int j = 0; j < p; ++j) {
        const auto c = zeta.layout.columns(j);
        eta += x[j] * (zeta.zeta[c[0]] + du * zeta.zeta[c[1]] + dv * zeta.zeta[c[2]]);
    }
    return eta;
}

}  // namespace lagr
