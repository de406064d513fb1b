#pragma once

// Independent test oracles. Deliberately implemented with plain loops and
// std::vector (no Eigen, none of the library's solver code) so they exercise
// a second route to every checked value.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- dense solve

// Gaussian elimination with partial pivoting; G is q x q row-major.
inline std::vector<double> gauss_solve(std::vector<double> G, std::vector<double> rhs) {
    const int q = static_cast<int>(rhs.size());
    for (int col = 0; col < q; ++col) {
        int piv = col;
        for (int r = col + 1; r < q; ++r)
            if (std::abs(G[r * q + col]) > std::abs(G[piv * q + col])) piv = r;
        if (piv != col) {
            for (int c = 0; c < q; ++c) std::swap(G[col * q + c], G[piv * q + c]);
            std::swap(rhs[col], rhs[piv]);
        }
        const double d = G[col * q + col];
        for (int r = col + 1; r < q; ++r) {
            const double f = G[r * q + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < q; ++c) G[r * q + c] -= f * G[col * q + c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(q);
    for (int r = q - 1; r >= 0; --r) {
        double acc = rhs[r];
        for (int c = r + 1; c < q; ++c) acc -= G[r * q + c] * x[c];
        x[r] = acc / G[r * q + r];
    }
    return x;
}

// Normal-equations WLS at full precision; Z is n x q row-major.
inline std::vector<double> wls_brute_force(const std::vector<double>& Z,
                                           const std::vector<double>& w,
                                           const std::vector<double>& y, int n, int q) {
    std::vector<double> G(q * q, 0.0), rhs(q, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < q; ++a) {
            rhs[a] += w[i] * Z[i * q + a] * y[i];
            for (int b = 0; b < q; ++b) G[a * q + b] += w[i] * Z[i * q + a] * Z[i * q + b];
        }
    }
    return gauss_solve(std::move(G), std::move(rhs));
}

// ------------------------------------------------------- group lasso objective

// Groups: j -> coefficients {j, p+j, 2p+j} of a 3p vector (p groups).
inline double group_norm(const std::vector<double>& zeta, int p, int j) {
    const double a = zeta[j], b = zeta[p + j], c = zeta[2 * p + j];
    return std::sqrt(a * a + b * b + c * c);
}

inline double penalty_term(const std::vector<double>& zeta, const std::vector<double>& phi,
                           int p) {
    double pen = 0.0;
    for (int j = 0; j < p; ++j) {
        const double norm = group_norm(zeta, p, j);
        if (norm == 0.0) continue;
        if (phi[j] == kInf) return kInf;
        pen += phi[j] * norm;
    }
    return pen;
}

// (1/2) sum w (y - Z zeta)^2 + sum phi_j ||zeta_(j)||, Z row-major n x 3p.
inline double lagr_objective(const std::vector<double>& Z, const std::vector<double>& w,
                             const std::vector<double>& y, int n, int p,
                             const std::vector<double>& zeta,
                             const std::vector<double>& phi) {
    const int q = 3 * p;
    double quad = 0.0;
    for (int i = 0; i < n; ++i) {
        double eta = 0.0;
        for (int a = 0; a < q; ++a) eta += Z[i * q + a] * zeta[a];
        const double r = y[i] - eta;
        quad += 0.5 * w[i] * r * r;
    }
    return quad + penalty_term(zeta, phi, p);
}

// ------------------------------------------------------------- FISTA minimizer

inline double power_iteration_lmax(const std::vector<double>& G, int q, int iters = 500) {
    std::vector<double> v(q, 1.0), t(q);
    double lmax = 1.0;
    for (int it = 0; it < iters; ++it) {
        for (int a = 0; a < q; ++a) {
            double acc = 0.0;
            for (int b = 0; b < q; ++b) acc += G[a * q + b] * v[b];
            t[a] = acc;
        }
        double norm = 0.0;
        for (double x : t) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 1.0;
        lmax = norm;
        for (int a = 0; a < q; ++a) v[a] = t[a] / norm;
    }
    return lmax;
}

inline void group_prox(std::vector<double>& zeta, const std::vector<double>& phi, int p,
                       double step) {
    for (int j = 0; j < p; ++j) {
        if (phi[j] == 0.0) continue;
        const double norm = group_norm(zeta, p, j);
        double scale = 0.0;
        if (phi[j] != kInf && norm > step * phi[j]) scale = 1.0 - step * phi[j] / norm;
        zeta[j] *= scale;
        zeta[p + j] *= scale;
        zeta[2 * p + j] *= scale;
    }
}

// FISTA on the weighted group lasso from one start.
inline std::vector<double> fista(const std::vector<double>& Z, const std::vector<double>& w,
                                 const std::vector<double>& y, int n, int p,
                                 const std::vector<double>& phi, std::vector<double> zeta,
                                 int iters) {
    const int q = 3 * p;
    std::vector<double> G(q * q, 0.0), Wy(q, 0.0);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < q; ++a) {
            Wy[a] += w[i] * Z[i * q + a] * y[i];
            for (int b = 0; b <= a; ++b) G[a * q + b] += w[i] * Z[i * q + a] * Z[i * q + b];
        }
    for (int a = 0; a < q; ++a)
        for (int b = a + 1; b < q; ++b) G[a * q + b] = G[b * q + a];

    const double step = 1.0 / (power_iteration_lmax(G, q) * 1.01 + 1e-12);
    for (int j = 0; j < p; ++j)
        if (phi[j] == kInf) zeta[j] = zeta[p + j] = zeta[2 * p + j] = 0.0;

    std::vector<double> prev = zeta, point = zeta, grad(q);
    double tk = 1.0;
    for (int it = 0; it < iters; ++it) {
        for (int a = 0; a < q; ++a) {
            double acc = -Wy[a];
            for (int b = 0; b < q; ++b) acc += G[a * q + b] * point[b];
            grad[a] = acc;
        }
        std::vector<double> next(q);
        for (int a = 0; a < q; ++a) next[a] = point[a] - step * grad[a];
        group_prox(next, phi, p, step);

        const double tN = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        for (int a = 0; a < q; ++a)
            point[a] = next[a] + ((tk - 1.0) / tN) * (next[a] - prev[a]);
        prev = next;
        tk = tN;
    }
    return prev;
}

// Best objective over random restarts (the objective is convex; restarts are
// insurance against implementation mistakes, not a search strategy).
inline double fista_multistart(const std::vector<double>& Z, const std::vector<double>& w,
                               const std::vector<double>& y, int n, int p,
                               const std::vector<double>& phi, int starts, int iters,
                               std::uint64_t seed) {
    const int q = 3 * p;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = kInf;
    for (int s = 0; s < starts; ++s) {
        std::vector<double> init(q, 0.0);
        if (s > 0)
            for (double& x : init) x = 2.0 * gauss(rng);
        const std::vector<double> sol = fista(Z, w, y, n, p, phi, init, iters);
        best = std::min(best, lagr_objective(Z, w, y, n, p, sol, phi));
    }
    return best;
}

// ------------------------------------------------ 3x3 block grid-search oracle

// min (1/2) g'Ag - b'g + phi ||g|| over [-3,3]^3 grid then coordinatewise
// ternary refinement. A row-major 3x3.
inline double block_objective(const double* A, const double* b, double phi, const double* g) {
    double quad = 0.0, lin = 0.0, nrm = 0.0;
    for (int a = 0; a < 3; ++a) {
        lin += b[a] * g[a];
        nrm += g[a] * g[a];
        for (int c = 0; c < 3; ++c) quad += g[a] * A[a * 3 + c] * g[c];
    }
    return 0.5 * quad - lin + phi * std::sqrt(nrm);
}

inline std::vector<double> block_grid_search(const double* A, const double* b, double phi,
                                             double lo = -3.0, double hi = 3.0,
                                             double step = 0.01) {
    double best[3] = {0, 0, 0};
    double best_val = block_objective(A, b, phi, best);
    const int steps = static_cast<int>(std::lround((hi - lo) / step));
    for (int i = 0; i <= steps; ++i) {
        double g[3];
        g[0] = lo + i * step;
        for (int j = 0; j <= steps; ++j) {
            g[1] = lo + j * step;
            for (int k = 0; k <= steps; ++k) {
                g[2] = lo + k * step;
                const double val = block_objective(A, b, phi, g);
                if (val < best_val) {
                    best_val = val;
                    best[0] = g[0];
                    best[1] = g[1];
                    best[2] = g[2];
                }
            }
        }
    }
    // Coordinatewise ternary refinement around the grid winner.
    double width = 2.0 * step;
    std::vector<double> g{best[0], best[1], best[2]};
    for (int round = 0; round < 200; ++round) {
        for (int c = 0; c < 3; ++c) {
            double a = g[c] - width, d = g[c] + width;
            for (int it = 0; it < 90; ++it) {
                const double m1 = a + (d - a) / 3.0, m2 = d - (d - a) / 3.0;
                double g1[3] = {g[0], g[1], g[2]}, g2[3] = {g[0], g[1], g[2]};
                g1[c] = m1;
                g2[c] = m2;
                if (block_objective(A, b, phi, g1) < block_objective(A, b, phi, g2))
                    d = m2;
                else
                    a = m1;
            }
            g[c] = 0.5 * (a + d);
        }
        width *= 0.7;
        if (width < 1e-13) break;
    }
    return g;
}

// ----------------------------------------------------------- GLM prox gradient

enum class QFamily { Gaussian, Poisson, Binomial };

// Q as a function of the linear predictor (canonical link), with the same
// clamps the implementation applies.
inline double q_of_eta(QFamily fam, double eta, double y) {
    switch (fam) {
        case QFamily::Gaussian: return -0.5 * (y - eta) * (y - eta);
        case QFamily::Poisson: {
            const double e = std::min(eta, 30.0);
            return y * e - std::exp(e);
        }
        case QFamily::Binomial: {
            const double e = eta < -30.0 ? -30.0 : (eta > 30.0 ? 30.0 : eta);
            return y * e - std::log1p(std::exp(e));
        }
    }
    return 0.0;
}

inline double dq_of_eta(QFamily fam, double eta, double y) {
    switch (fam) {
        case QFamily::Gaussian: return y - eta;
        case QFamily::Poisson: return y - std::exp(std::min(eta, 30.0));
        case QFamily::Binomial: {
            const double e = eta < -30.0 ? -30.0 : (eta > 30.0 ? 30.0 : eta);
            return y - 1.0 / (1.0 + std::exp(-e));
        }
    }
    return 0.0;
}

inline double glm_objective(QFamily fam, const std::vector<double>& Z,
                            const std::vector<double>& w, const std::vector<double>& y, int n,
                            int p, const std::vector<double>& zeta,
                            const std::vector<double>& phi) {
    const int q = 3 * p;
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
        double eta = 0.0;
        for (int a = 0; a < q; ++a) eta += Z[i * q + a] * zeta[a];
        ll += w[i] * q_of_eta(fam, eta, y[i]);
    }
    return -ll + penalty_term(zeta, phi, p);
}

// Proximal gradient with backtracking on the penalized negative
// quasi-likelihood, from one start.
inline std::vector<double> prox_grad_glm(QFamily fam, const std::vector<double>& Z,
                                         const std::vector<double>& w,
                                         const std::vector<double>& y, int n, int p,
                                         const std::vector<double>& phi,
                                         std::vector<double> zeta, int iters) {
    const int q = 3 * p;
    for (int j = 0; j < p; ++j)
        if (phi[j] == kInf) zeta[j] = zeta[p + j] = zeta[2 * p + j] = 0.0;

    const auto smooth = [&](const std::vector<double>& z) {
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            double eta = 0.0;
            for (int a = 0; a < q; ++a) eta += Z[i * q + a] * z[a];
            ll += w[i] * q_of_eta(fam, eta, y[i]);
        }
        return -ll;
    };

    double step = 1.0;
    std::vector<double> grad(q), next(q);
    for (int it = 0; it < iters; ++it) {
        double f0 = 0.0;
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            double eta = 0.0;
            for (int a = 0; a < q; ++a) eta += Z[i * q + a] * zeta[a];
            f0 -= w[i] * q_of_eta(fam, eta, y[i]);
            const double d = -w[i] * dq_of_eta(fam, eta, y[i]);
            for (int a = 0; a < q; ++a) grad[a] += d * Z[i * q + a];
        }
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (int a = 0; a < q; ++a) next[a] = zeta[a] - step * grad[a];
            group_prox(next, phi, p, step);
            double quad = f0, dist2 = 0.0;
            for (int a = 0; a < q; ++a) {
                const double d = next[a] - zeta[a];
                quad += grad[a] * d;
                dist2 += d * d;
            }
            quad += dist2 / (2.0 * step);
            if (smooth(next) <= quad + 1e-12 * (1.0 + std::abs(quad))) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        double delta = 0.0;
        for (int a = 0; a < q; ++a) delta = std::max(delta, std::abs(next[a] - zeta[a]));
        zeta = next;
        step *= 1.2;  // gentle recovery so the line search stays active
        if (delta < 1e-14) break;
    }
    return zeta;
}

inline double prox_grad_glm_multistart(QFamily fam, const std::vector<double>& Z,
                                       const std::vector<double>& w,
                                       const std::vector<double>& y, int n, int p,
                                       const std::vector<double>& phi, int starts, int iters,
                                       std::uint64_t seed) {
    const int q = 3 * p;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = kInf;
    for (int s = 0; s < starts; ++s) {
        std::vector<double> init(q, 0.0);
        if (s > 0)
            for (double& x : init) x = 0.5 * gauss(rng);
        const std::vector<double> sol = prox_grad_glm(fam, Z, w, y, n, p, phi, init, iters);
        best = std::min(best, glm_objective(fam, Z, w, y, n, p, sol, phi));
    }
    return best;
}

// -------------------------------------------------------- Cartesian quadrature

// Midpoint-rule integrals of K, u^2 K and K^2 over [-1,1]^2 (independent of
// the implementation's polar route).
struct PlanarMoments {
    double kappa0, kappa2, nu0;
};

inline PlanarMoments epanechnikov_moments_cartesian(int cells_per_axis = 3000) {
    const double h = 2.0 / cells_per_axis;
    double k0 = 0.0, k2 = 0.0, n0 = 0.0;
    for (int i = 0; i < cells_per_axis; ++i) {
        const double u = -1.0 + (i + 0.5) * h;
        for (int j = 0; j < cells_per_axis; ++j) {
            const double v = -1.0 + (j + 0.5) * h;
            const double r2 = u * u + v * v;
            if (r2 >= 1.0) continue;
            const double k = 0.75 * (1.0 - r2);
            k0 += k;
            k2 += u * u * k;
            n0 += k * k;
        }
    }
    const double cell = h * h;
    return {k0 * cell, k2 * cell, n0 * cell};
}

}  // namespace oracle
