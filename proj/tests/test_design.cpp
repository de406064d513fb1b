#include <doctest.h>

#include <random>

#include "lagr/design.hpp"
#include "oracles.hpp"

using namespace lagr;

namespace {

Dataset tiny_dataset(int n, int p, std::uint64_t seed, bool intercept = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Dataset d;
    d.X.resize(n, p);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        d.locations.push_back({unif(rng), unif(rng)});
        for (int j = 0; j < p; ++j) d.X(i, j) = gauss(rng);
        d.y[i] = gauss(rng);
    }
    for (int j = 0; j < p; ++j) d.covariate_names.push_back("c" + std::to_string(j));
    d.intercept_included = false;
    return intercept ? d.with_intercept() : d;
}

WeightVector unit_weights(int n) {
    WeightVector w;
    w.weights = Eigen::VectorXd::Ones(n);
    w.support_count = n;
    w.bandwidth_used = 1.0;
    return w;
}

}  // namespace

TEST_CASE("augment lays out [X | LX | MX] blockwise") {
    SUBCASE("single row Kronecker product by hand") {
        Dataset d;
        d.locations = {{1.5, 0.0}};  // s_i - s = (0.5, -1)
        d.X.resize(1, 2);
        d.X << 1.0, 2.0;
        d.y.resize(1);
        d.y << 0.0;
        d.covariate_names = {"a", "b"};
        const AugmentedDesign design = augment(d, {1.0, 1.0});
        Eigen::RowVectorXd expected(6);
        expected << 1.0, 2.0, 0.5, 1.0, -1.0, -2.0;
        CHECK((design.Z.row(0) - expected).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("all data at the evaluation point kills the interaction blocks") {
        Dataset d = tiny_dataset(5, 2, 11, false);
        for (Location& s : d.locations) s = {0.25, -0.5};
        const AugmentedDesign design = augment(d, {0.25, -0.5});
        CHECK(design.Z.rightCols(4).cwiseAbs().maxCoeff() == 0.0);
        CHECK((design.Z.leftCols(2) - d.X).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("translation invariance") {
        Dataset d = tiny_dataset(6, 2, 12);
        Dataset shifted = d;
        for (Location& s : shifted.locations) s = {s.u + 7.0, s.v - 3.0};
        const AugmentedDesign a = augment(d, {0.25, 0.5});
        const AugmentedDesign b = augment(shifted, {7.25, -2.5});
        CHECK((a.Z - b.Z).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("group columns") {
        const GroupLayout layout{3, 0};
        CHECK(layout.columns(1) == std::array<int, 3>{1, 4, 7});
        CHECK(layout.penalized(1));
        CHECK(!layout.penalized(0));
    }
}

TEST_CASE("wls_fit") {
    SUBCASE("square invertible system interpolates") {
        // One covariate, no intercept: 3 coefficients, 3 observations.
        Dataset d = tiny_dataset(3, 1, 21, false);
        const AugmentedDesign design = augment(d, {0.4, 0.6});
        const LocalCoefficients z = wls_fit(design, unit_weights(3), d.y);
        CHECK((design.Z * z.zeta - d.y).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("constant weights equal the OLS solution") {
        Dataset d = tiny_dataset(40, 2, 22);
        const AugmentedDesign design = augment(d, {0.5, 0.5});
        WeightVector w = unit_weights(40);
        w.weights.array() = 0.37;  // any positive constant
        const LocalCoefficients z = wls_fit(design, w, d.y);
        const Eigen::VectorXd ols =
            (design.Z.transpose() * design.Z).ldlt().solve(design.Z.transpose() * d.y);
        CHECK((z.zeta - ols).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("matches the brute-force normal-equations oracle") {
        for (std::uint64_t seed = 0; seed < 12; ++seed) {
            const int n = 5 + static_cast<int>(seed % 4);  // <= 8 observations
            Dataset d = tiny_dataset(n, 1, 100 + seed);    // intercept + 1 covariate
            const AugmentedDesign design = augment(d, {0.3, 0.7});
            std::mt19937_64 rng(200 + seed);
            std::uniform_real_distribution<double> unif(0.1, 2.0);
            WeightVector w = unit_weights(n);
            for (int i = 0; i < n; ++i) w.weights[i] = unif(rng);

            const int q = static_cast<int>(design.Z.cols());
            if (n < q) continue;
            std::vector<double> Zr(n * q), wv(n), yv(n);
            for (int i = 0; i < n; ++i) {
                wv[i] = w.weights[i];
                yv[i] = d.y[i];
                for (int a = 0; a < q; ++a) Zr[i * q + a] = design.Z(i, a);
            }
            const std::vector<double> expect = oracle::wls_brute_force(Zr, wv, yv, n, q);
            const LocalCoefficients z = wls_fit(design, w, d.y);
            for (int a = 0; a < q; ++a) CHECK(std::abs(z.zeta[a] - expect[a]) < 1e-10);
        }
    }
    SUBCASE("scaling y scales the estimate; rescaling weights changes nothing") {
        Dataset d = tiny_dataset(15, 2, 23);
        const AugmentedDesign design = augment(d, {0.5, 0.25});
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> unif(0.2, 1.5);
        WeightVector w = unit_weights(15);
        for (int i = 0; i < 15; ++i) w.weights[i] = unif(rng);

        const LocalCoefficients base = wls_fit(design, w, d.y);
        const LocalCoefficients scaled = wls_fit(design, w, Eigen::VectorXd(2.0 * d.y));
        CHECK((scaled.zeta - 2.0 * base.zeta).cwiseAbs().maxCoeff() <
              1e-12 * base.zeta.cwiseAbs().maxCoeff());

        WeightVector w2 = w;
        w2.weights *= 3.7;
        const LocalCoefficients rescaled = wls_fit(design, w2, d.y);
        CHECK((rescaled.zeta - base.zeta).cwiseAbs().maxCoeff() <
              1e-11 * (1.0 + base.zeta.cwiseAbs().maxCoeff()));
    }
    SUBCASE("duplicated covariate is a singular design naming the groups") {
        Dataset d = tiny_dataset(20, 2, 24);
        d.X.col(2) = d.X.col(1);  // duplicate the two penalized covariates
        d.covariate_names[2] = "dup";
        const AugmentedDesign design = augment(d, {0.5, 0.5});
        CHECK_THROWS_AS(wls_fit(design, unit_weights(20), d.y), Error);
        try {
            wls_fit(design, unit_weights(20), d.y);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::SingularDesign);
        }
    }
    SUBCASE("zero effective sample") {
        Dataset d = tiny_dataset(4, 1, 25);
        const AugmentedDesign design = augment(d, {0.5, 0.5});
        WeightVector w = unit_weights(4);
        w.weights.setZero();
        w.support_count = 0;
        CHECK_THROWS_AS(wls_fit(design, w, d.y), Error);
    }
}

TEST_CASE("estimate_sigma2") {
    SUBCASE("zero residuals give zero") {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(5);
        CHECK(estimate_sigma2(r, unit_weights(5), 2.0) == 0.0);
    }
    SUBCASE("unit weights, no correction: mean square") {
        Eigen::VectorXd r(2);
        r << 1.0, -1.0;
        CHECK(estimate_sigma2(r, unit_weights(2), 0.0) == doctest::Approx(1.0));
    }
    SUBCASE("weighted three-point case by hand") {
        Eigen::VectorXd r(3);
        r << 1.0, -1.0, 2.0;
        WeightVector w = unit_weights(3);
        w.weights << 1.0, 2.0, 3.0;
        CHECK(estimate_sigma2(r, w, 0.0) == doctest::Approx(2.5));
        CHECK(estimate_sigma2(r, w, 2.0) == doctest::Approx(11.25));
    }
    SUBCASE("nonpositive denominator is a degenerate neighborhood") {
        Eigen::VectorXd r(2);
        r << 1.0, 2.0;
        CHECK_THROWS_AS(estimate_sigma2(r, unit_weights(2), 5.0), Error);
    }
}

TEST_CASE("predict") {
    GroupLayout layout{2, -1};
    LocalCoefficients z;
    z.layout = layout;
    z.zeta.resize(6);
    // beta = (1, 2), grad_u = (0.5, 0), grad_v = (0, -1)
    z.zeta << 1.0, 2.0, 0.5, 0.0, 0.0, -1.0;

    SUBCASE("hand-computed extrapolation") {
        const std::vector<double> x{1.0, 1.0};
        CHECK(predict(z, x, {2.0, 1.0}, {0.0, 0.0}) == doctest::Approx(3.0));
    }
    SUBCASE("at the center the interactions vanish") {
        const std::vector<double> x{2.0, -1.0};
        CHECK(predict(z, x, {5.0, 5.0}, {5.0, 5.0}) == doctest::Approx(2.0 * 1.0 - 2.0));
    }
    SUBCASE("zero gradients make the prediction location-free") {
        LocalCoefficients flat = z;
        flat.zeta.tail(4).setZero();
        const std::vector<double> x{1.0, 2.0};
        const double at_center = predict(flat, x, {0.0, 0.0}, {0.0, 0.0});
        CHECK(predict(flat, x, {9.0, -4.0}, {0.0, 0.0}) == at_center);
    }
    SUBCASE("dimension mismatch") {
        const std::vector<double> x{1.0};
        CHECK_THROWS_AS(predict(z, x, {0.0, 0.0}, {0.0, 0.0}), Error);
    }
}

TEST_CASE("augment and predict are consistent on training rows") {
    Dataset d = tiny_dataset(10, 2, 31);
    const Location s{0.4, 0.4};
    const AugmentedDesign design = augment(d, s);
    LocalCoefficients z;
    z.layout = design.layout;
    z.zeta.resize(design.Z.cols());
    std::mt19937_64 rng(32);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int a = 0; a < z.zeta.size(); ++a) z.zeta[a] = gauss(rng);
    for (int i = 0; i < d.n(); ++i) {
        std::vector<double> x(d.p());
        for (int j = 0; j < d.p(); ++j) x[j] = d.X(i, j);
        const double via_design = design.Z.row(i).dot(z.zeta);
        const double via_predict = predict(z, x, d.locations[i], s);
        CHECK(std::abs(via_design - via_predict) <
              1e-12 * (1.0 + std::abs(via_design)));
    }
}

TEST_CASE("dataset validation") {
    Dataset d = tiny_dataset(5, 2, 41);
    CHECK_NOTHROW(d.validate());
    SUBCASE("intercept column must be ones") {
        d.X(2, 0) = 3.0;
        CHECK_THROWS_AS(d.validate(), Error);
    }
    SUBCASE("names must be unique") {
        d.covariate_names[1] = d.covariate_names[2];
        CHECK_THROWS_AS(d.validate(), Error);
    }
    SUBCASE("non-finite entries rejected") {
        d.y[0] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(d.validate(), Error);
    }
    SUBCASE("with_intercept is idempotent") {
        const Dataset again = d.with_intercept();
        CHECK(again.p() == d.p());
    }
}
