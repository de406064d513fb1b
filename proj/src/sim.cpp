#include "lagr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numeric>

namespace lagr {

namespace {

// Stream tags (third path element after rho/sigma bits and the replicate).
constexpr std::uint64_t kTagCovariate = 100;  // +j
constexpr std::uint64_t kTagTruth = 200;      // +j
constexpr std::uint64_t kTagNoise = 300;
constexpr std::uint64_t kTagSubsample = 400;  // +n
constexpr std::uint64_t kTagEval = 500;       // +n (oracle eval points)

std::uint64_t bits_of(double x) {
    std::uint64_t b;
    static_assert(sizeof(b) == sizeof(x));
    std::memcpy(&b, &x, sizeof(b));
    return b;
}

RngStream scenario_stream(const ScenarioSpec& spec, std::uint64_t tag) {
    return RngStream::from_path(spec.seed, {bits_of(spec.rho), bits_of(spec.sigma_eps),
                                            static_cast<std::uint64_t>(spec.replicate), tag});
}

Eigen::MatrixXd covariance_matrix(std::span<const Location> locations, const GrfSpec& spec) {
    const int n = static_cast<int>(locations.size());
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i) {
        C(i, i) = spec.variance + spec.nugget;
        for (int j = i + 1; j < n; ++j) {
            const double du = locations[i].u - locations[j].u;
            const double dv = locations[i].v - locations[j].v;
            const double d = std::sqrt(du * du + dv * dv);
            C(i, j) = C(j, i) = spec.variance * std::exp(-d / spec.range);
        }
    }
    return C;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& C, double jitter) {
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::MatrixXd Cj = C;
    Cj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt2(Cj);
    if (llt2.info() == Eigen::Success) return llt2.matrixL();
    fail(ErrorKind::Numerical,
         "simulate_grf: covariance factorization failed even after jitter");
}

// Factor cache for the fixed 20x20 grid (the simulation draws thousands of
// fields from a handful of covariance settings).
const Eigen::MatrixXd& grid20_factor(const GrfSpec& spec) {
    static std::mutex mu;
    static std::map<std::array<double, 3>, Eigen::MatrixXd> cache;
    std::lock_guard<std::mutex> lock(mu);
    const std::array<double, 3> key{spec.variance, spec.range, spec.nugget};
    auto it = cache.find(key);
    if (it == cache.end()) {
        const std::vector<Location> grid = unit_grid20();
        const double jitter = 1e-10 * (spec.variance > 0.0 ? spec.variance : 1.0);
        it = cache.emplace(key, cholesky_lower(covariance_matrix(grid, spec), jitter)).first;
    }
    return it->second;
}

Eigen::VectorXd draw_field(const Eigen::MatrixXd& L, double mean, RngStream& rng) {
    Eigen::VectorXd eps(L.rows());
    for (int i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
    Eigen::VectorXd field = L * eps;
    field.array() += mean;
    return field;
}

}  // namespace

std::vector<Location> unit_grid20() {
    std::vector<Location> grid;
    grid.reserve(400);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j)
            grid.push_back({(i + 0.5) / 20.0, (j + 0.5) / 20.0});
    return grid;
}

Eigen::VectorXd simulate_grf(std::span<const Location> locations, const GrfSpec& spec,
                             RngStream& rng) {
    if (locations.empty()) fail(ErrorKind::Input, "simulate_grf: empty location set");
    if (spec.variance < 0.0 || spec.nugget < 0.0 || !(spec.range > 0.0))
        fail(ErrorKind::Config, "simulate_grf: variance/nugget must be >= 0 and range > 0");
    const int n = static_cast<int>(locations.size());
    if (spec.variance == 0.0 && spec.nugget == 0.0)
        return Eigen::VectorXd::Constant(n, spec.mean);
    const double jitter = 1e-10 * (spec.variance > 0.0 ? spec.variance : 1.0);
    const Eigen::MatrixXd L = cholesky_lower(covariance_matrix(locations, spec), jitter);
    return draw_field(L, spec.mean, rng);
}

Eigen::MatrixXd induce_correlation(const Eigen::MatrixXd& X, double rho) {
    const int p = static_cast<int>(X.cols());
    if (p < 1) fail(ErrorKind::Input, "induce_correlation: empty design");
    if (rho == 0.0) return X;
    const double lower = p > 1 ? -1.0 / (p - 1) : -1.0;
    if (!(rho > lower) || !(rho < 1.0))
        fail(ErrorKind::Config,
             "induce_correlation: rho must lie in (" + std::to_string(lower) +
                 ", 1) for a positive-definite equicorrelation matrix");
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(p, p, rho);
    sigma.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        fail(ErrorKind::Numerical, "induce_correlation: Cholesky failed");
    const Eigen::MatrixXd R = Eigen::MatrixXd(llt.matrixL()).transpose();  // R'R = sigma
    return X * R;
}

Scenario generate_scenario(const ScenarioSpec& spec) {
    if (spec.subsample_n < 1 || spec.subsample_n > 400)
        fail(ErrorKind::Config, "generate_scenario: subsample_n must lie in [1, 400]");
    if (!(spec.sigma_eps >= 0.0))
        fail(ErrorKind::Config, "generate_scenario: sigma_eps must be >= 0");

    Scenario out;
    out.truth.grid = unit_grid20();
    const int N = 400;

    // Covariate fields.
    const GrfSpec cov_spec{1.0, 0.1, 0.2, 0.0};
    Eigen::MatrixXd Xraw(N, 4);
    for (int j = 0; j < 4; ++j) {
        RngStream rng = scenario_stream(spec, kTagCovariate + j);
        Xraw.col(j) = draw_field(grid20_factor(cov_spec), 0.0, rng);
    }
    const Eigen::MatrixXd X = induce_correlation(Xraw, spec.rho);

    // Coefficient surfaces.
    out.truth.beta = Eigen::MatrixXd::Zero(N, 4);
    const double truth_var[3] = {10.0, 1.0, 0.1};
    for (int j = 0; j < 3; ++j) {
        const GrfSpec truth_spec{truth_var[j], 1.0, 0.0, 0.0};
        RngStream rng = scenario_stream(spec, kTagTruth + j);
        out.truth.beta.col(j) = draw_field(grid20_factor(truth_spec), 0.0, rng);
    }

    Eigen::VectorXd y(N);
    {
        RngStream rng = scenario_stream(spec, kTagNoise);
        for (int i = 0; i < N; ++i)
            y[i] = X.row(i).dot(out.truth.beta.row(i)) + spec.sigma_eps * rng.normal();
    }

    out.sample_rows.resize(N);
    std::iota(out.sample_rows.begin(), out.sample_rows.end(), 0);
    if (spec.subsample_n < N) {
        RngStream rng = scenario_stream(spec, kTagSubsample + spec.subsample_n);
        // Partial Fisher-Yates, then sort the chosen indices.
        for (int i = 0; i < spec.subsample_n; ++i) {
            const int j = i + static_cast<int>(rng.below(N - i));
            std::swap(out.sample_rows[i], out.sample_rows[j]);
        }
        out.sample_rows.resize(spec.subsample_n);
        std::sort(out.sample_rows.begin(), out.sample_rows.end());
    }

    const int n = static_cast<int>(out.sample_rows.size());
    out.dataset.locations.reserve(n);
    out.dataset.X.resize(n, 4);
    out.dataset.y.resize(n);
    for (int k = 0; k < n; ++k) {
        const int row = out.sample_rows[k];
        out.dataset.locations.push_back(out.truth.grid[row]);
        out.dataset.X.row(k) = X.row(row);
        out.dataset.y[k] = y[row];
    }
    out.dataset.covariate_names = {"X1", "X2", "X3", "X4"};
    out.dataset.intercept_included = false;
    return out;
}

double mise(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
    if (estimate.size() != truth.size() || estimate.size() == 0)
        fail(ErrorKind::Input, "mise: evaluation location sets do not match");
    return (estimate - truth).squaredNorm() / static_cast<double>(estimate.size());
}

double zero_frequency(const CoefficientSurface& surface, int group) {
    if (group < 0 || group >= surface.layout.p)
        fail(ErrorKind::Input, "zero_frequency: group index out of range");
    int ok = 0, zero = 0;
    for (const LocationFit& f : surface.fits) {
        if (!f.ok) continue;
        ++ok;
        if (!f.fit.active[group]) ++zero;
    }
    if (ok == 0) fail(ErrorKind::Input, "zero_frequency: no successful fits in the surface");
    return static_cast<double>(zero) / ok;
}

namespace {

struct MethodRun {
    std::array<double, 4> mise{};
    std::array<double, 4> zero_freq{};
    int failed = 0;
};

MethodRun evaluate_method(const Scenario& scenario, bool penalized,
                          const StudySettings& settings, int n) {
    SurfaceOptions opt;
    opt.bw = BandwidthSpec::nearest_neighbor(default_bandwidth(n));
    opt.gamma = settings.gamma;
    if (!penalized) opt.fixed_lambda = 0.0;
    opt.grid = settings.grid;
    opt.tol = settings.tol;
    opt.max_sweeps = settings.max_sweeps;
    opt.workers = settings.workers;

    const CoefficientSurface surface =
        fit_surface(scenario.dataset, scenario.dataset.locations, opt);

    MethodRun run;
    run.failed = surface.n_failed();
    for (int j = 0; j < 4; ++j) {
        std::vector<double> est, truth;
        est.reserve(surface.fits.size());
        for (std::size_t k = 0; k < surface.fits.size(); ++k) {
            if (!surface.fits[k].ok) continue;
            est.push_back(surface.fits[k].fit.zeta_hat.group(j + 1)[0]);
            truth.push_back(scenario.truth.beta(scenario.sample_rows[k], j));
        }
        run.mise[j] = mise(Eigen::Map<Eigen::VectorXd>(est.data(), est.size()),
                           Eigen::Map<Eigen::VectorXd>(truth.data(), truth.size()));
        run.zero_freq[j] = zero_frequency(surface, j + 1);
    }
    return run;
}

}  // namespace

std::vector<CellMetrics> run_study(const StudySettings& settings) {
    if (settings.ns.empty() || settings.rhos.empty() || settings.sigma_eps.empty())
        fail(ErrorKind::Config, "run_study: empty settings grid");
    if (settings.replicates < 1) fail(ErrorKind::Config, "run_study: replicates must be >= 1");
    if (!settings.lagr && !settings.vcr)
        fail(ErrorKind::Config, "run_study: at least one method must be enabled");

    std::vector<CellMetrics> table;
    for (int n : settings.ns) {
        for (double rho : settings.rhos) {
            for (double sig : settings.sigma_eps) {
                std::vector<std::string> methods;
                if (settings.lagr) methods.push_back("LAGR");
                if (settings.vcr) methods.push_back("VCR");
                std::vector<CellMetrics> cells;
                for (const std::string& m : methods) {
                    CellMetrics cell;
                    cell.n = n;
                    cell.rho = rho;
                    cell.sigma_eps = sig;
                    cell.method = m;
                    cells.push_back(std::move(cell));
                }
                for (int rep = 0; rep < settings.replicates; ++rep) {
                    const Scenario scenario =
                        generate_scenario({n, rho, sig, rep, settings.seed});
                    for (CellMetrics& cell : cells) {
                        const MethodRun run = evaluate_method(
                            scenario, cell.method == "LAGR", settings, n);
                        ReplicateMetrics rm;
                        rm.replicate = rep;
                        rm.mise = run.mise;
                        rm.zero_freq = run.zero_freq;
                        rm.failed_locations = run.failed;
                        cell.failed_locations += run.failed;
                        cell.replicates.push_back(rm);
                    }
                }
                for (CellMetrics& cell : cells) {
                    for (int j = 0; j < 4; ++j) {
                        double ms = 0.0, zf = 0.0;
                        for (const ReplicateMetrics& rm : cell.replicates) {
                            ms += rm.mise[j];
                            zf += rm.zero_freq[j];
                        }
                        cell.mise[j] = ms / cell.replicates.size();
                        cell.zero_freq[j] = zf / cell.replicates.size();
                    }
                    table.push_back(std::move(cell));
                }
            }
        }
    }
    return table;
}

OracleReport oracle_check(const OracleSettings& settings) {
    if (settings.ns.empty()) fail(ErrorKind::Config, "oracle_check: empty n ladder");
    if (settings.replicates < 2)
        fail(ErrorKind::Config, "oracle_check: needs at least 2 replicates");
    if (settings.eval_points < 1)
        fail(ErrorKind::Config, "oracle_check: eval_points must be >= 1");

    OracleReport report;
    report.gamma = settings.gamma;
    report.gamma_ok = settings.gamma > 1.0;
    // The solver requires gamma > 1; a violating request is flagged and the
    // diagnostics run at the boundary instead of failing.
    const double gamma_eff = report.gamma_ok ? settings.gamma : 1.0 + 1e-9;
    if (!report.gamma_ok)
        report.note = "gamma <= 1 violates the oracle-property requirement gamma > d/2 = 1; "
                      "diagnostics ran with gamma clamped to 1 + 1e-9";

    const KernelMoments moments = kernel_moments();
    const int stat_level = *std::max_element(settings.ns.begin(), settings.ns.end());
    report.stat_n_level = stat_level;

    // Statistic location: an interior cell center, index 9*20+9.
    const int star_i = 9, star_j = 9;
    const int star_idx = star_i * 20 + star_j;
    const Location s_star{(star_i + 0.5) / 20.0, (star_j + 0.5) / 20.0};

    for (int n : settings.ns) {
        OracleLevel level;
        level.n = n;
        long zero1 = 0, zero4 = 0, evaluated = 0;

        for (int rep = 0; rep < settings.replicates; ++rep) {
            const ScenarioSpec spec{n, settings.rho, settings.sigma_eps, rep, settings.seed};
            const Scenario scenario = generate_scenario(spec);

            // Evaluation points: the statistic location plus seeded draws
            // from the observation locations.
            std::vector<Location> eval{s_star};
            {
                RngStream rng = scenario_stream(spec, kTagEval + n);
                const int extra = std::min(settings.eval_points - 1,
                                           static_cast<int>(scenario.dataset.locations.size()));
                std::vector<int> idx(scenario.dataset.locations.size());
                std::iota(idx.begin(), idx.end(), 0);
                for (int i = 0; i < extra; ++i) {
                    const int j =
                        i + static_cast<int>(rng.below(idx.size() - i));
                    std::swap(idx[i], idx[j]);
                    eval.push_back(scenario.dataset.locations[idx[i]]);
                }
            }

            SurfaceOptions opt;
            opt.bw = BandwidthSpec::nearest_neighbor(default_bandwidth(n));
            opt.gamma = gamma_eff;
            opt.grid = settings.grid;
            opt.tol = settings.tol;
            opt.max_sweeps = settings.max_sweeps;
            opt.workers = settings.workers;
            const CoefficientSurface surface =
                fit_surface(scenario.dataset, eval, opt);

            for (const LocationFit& f : surface.fits) {
                if (!f.ok) {
                    ++level.failed_fits;
                    continue;
                }
                ++evaluated;
                if (!f.fit.active[1]) ++zero1;
                if (!f.fit.active[4]) ++zero4;
            }

            if (n == stat_level && surface.fits[0].ok) {
                const LocationFit& f = surface.fits[0];
                const double h = f.bandwidth_used;
                const double beta1_hat = f.fit.zeta_hat.group(1)[0];
                const double beta1 = scenario.truth.beta(star_idx, 0);

                // Central finite differences of the drawn truth surface,
                // step 1/20.
                const auto& b = scenario.truth.beta;
                const double inv_step2 = 400.0;
                const double fd_uu =
                    (b(star_idx + 20, 0) - 2.0 * beta1 + b(star_idx - 20, 0)) * inv_step2;
                const double fd_vv =
                    (b(star_idx + 1, 0) - 2.0 * beta1 + b(star_idx - 1, 0)) * inv_step2;
                const double bias =
                    (moments.kappa2 / (2.0 * moments.kappa0)) * h * h * (fd_uu + fd_vv);

                // Kernel-weighted empirical second moment of the active
                // covariates (intercept, X1..X3) at the statistic location.
                const WeightVector W = local_weights(
                    s_star, scenario.dataset.locations,
                    BandwidthSpec::nearest_neighbor(default_bandwidth(n)));
                Eigen::Matrix4d psi = Eigen::Matrix4d::Zero();
                double wsum = 0.0;
                for (int i = 0; i < scenario.dataset.n(); ++i) {
                    const double w = W.weights[i];
                    if (w <= 0.0) continue;
                    Eigen::Vector4d x(1.0, scenario.dataset.X(i, 0),
                                      scenario.dataset.X(i, 1), scenario.dataset.X(i, 2));
                    psi += w * x * x.transpose();
                    wsum += w;
                }
                psi /= wsum;
                const double psi_inv_11 = psi.inverse()(1, 1);
                const double var_pred = moments.nu0 * settings.sigma_eps * settings.sigma_eps *
                                        psi_inv_11 /
                                        (moments.kappa0 * moments.kappa0 * h * h * n);
                report.stats.push_back((beta1_hat - beta1 - bias) / std::sqrt(var_pred));
            }
        }

        level.zero_freq_b1 = evaluated > 0 ? static_cast<double>(zero1) / evaluated : 0.0;
        level.zero_freq_b4 = evaluated > 0 ? static_cast<double>(zero4) / evaluated : 0.0;
        level.gap = level.zero_freq_b4 - level.zero_freq_b1;
        report.levels.push_back(level);
    }

    report.stat_replicates = static_cast<int>(report.stats.size());
    if (report.stat_replicates >= 2) {
        double mean = 0.0;
        for (double t : report.stats) mean += t;
        mean /= report.stat_replicates;
        double var = 0.0;
        for (double t : report.stats) var += (t - mean) * (t - mean);
        var /= (report.stat_replicates - 1);
        report.stat_mean = mean;
        report.stat_var = var;
    }
    return report;
}

}  // namespace lagr
