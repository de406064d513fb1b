#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lagr/simd.hpp"

using lagr::simd::Ops;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = gauss(rng);
    return v;
}

bool close(double a, double b, double rel = 1e-12) {
    return std::abs(a - b) <= rel * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace

TEST_CASE("every available backend matches the scalar reference") {
    const Ops& ref = lagr::simd::scalar_ops();
    const std::vector<std::size_t> lengths{0, 1, 2, 3, 4, 5, 7, 8, 9, 13, 16, 31, 100, 1001};
    std::mt19937_64 rng(42);

    for (const Ops* backend : lagr::simd::available_backends()) {
        CAPTURE(backend->name);
        for (std::size_t n : lengths) {
            const auto a = random_vec(rng, n);
            const auto b = random_vec(rng, n);
            auto w = random_vec(rng, n);
            for (double& x : w) x = std::abs(x);  // weights are nonnegative
            auto dist = random_vec(rng, n, 0.8);
            for (double& x : dist) x = std::abs(x);

            CHECK(close(backend->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n)));
            CHECK(close(backend->wdot(w.data(), a.data(), b.data(), n),
                        ref.wdot(w.data(), a.data(), b.data(), n)));
            CHECK(close(backend->wsumsq(w.data(), a.data(), n),
                        ref.wsumsq(w.data(), a.data(), n)));
            CHECK(close(backend->epan_sum(dist.data(), n, 1.25),
                        ref.epan_sum(dist.data(), n, 1.25)));

            std::vector<double> wa(n), wb(n);
            backend->epan_weights(dist.data(), n, 1.25, 1.5625, wa.data());
            ref.epan_weights(dist.data(), n, 1.25, 1.5625, wb.data());
            for (std::size_t i = 0; i < n; ++i) CHECK(wa[i] == wb[i]);

            std::vector<double> ya = b, yb = b;
            backend->axpy(-0.77, a.data(), ya.data(), n);
            ref.axpy(-0.77, a.data(), yb.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(ya[i] == yb[i]);

            std::vector<double> da(n), db(n);
            backend->distances(a.data(), b.data(), n, 0.25, -0.5, da.data());
            ref.distances(a.data(), b.data(), n, 0.25, -0.5, db.data());
            for (std::size_t i = 0; i < n; ++i) CHECK(da[i] == db[i]);
        }
    }
}

TEST_CASE("kernel weights vanish exactly at and beyond the support boundary") {
    // inv_h = 0.5 makes dist = 2 hit x = 1 exactly in floating point.
    const std::vector<double> dist{0.0, 1.0, 1.999999, 2.0, 2.5, 100.0};
    for (const Ops* backend : lagr::simd::available_backends()) {
        CAPTURE(backend->name);
        std::vector<double> w(dist.size());
        backend->epan_weights(dist.data(), dist.size(), 0.5, 0.25, w.data());
        CHECK(w[0] == 0.25 * 0.75);
        CHECK(w[1] > 0.0);
        CHECK(w[2] > 0.0);
        CHECK(w[3] == 0.0);
        CHECK(w[4] == 0.0);
        CHECK(w[5] == 0.0);
    }
}

TEST_CASE("active backend is one of the compiled backends") {
    const Ops& active = lagr::simd::ops();
    bool known = false;
    for (const Ops* backend : lagr::simd::available_backends())
        if (std::string(backend->name) == active.name) known = true;
    CHECK(known);
}
