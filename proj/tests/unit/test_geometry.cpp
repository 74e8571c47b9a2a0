#include "doctest.h"

#include "morawetz/geometry.hpp"
#include "morawetz/multipliers.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace morawetz;

TEST_CASE("tortoise coordinate vanishes at the photon sphere") {
    for (const double m : {0.5, 1.0, 3.0}) {
        const Geometry g(m);
        CHECK(rstar_of_r(3.0 * m, g) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(std::abs(r_of_rstar(0.0, g) - 3.0 * m) <= 1e-13 * m);
    }
}

TEST_CASE("geometry rejects bad input") {
    CHECK_THROWS_AS(Geometry(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Geometry(-1.0), std::invalid_argument);
    const Geometry g(1.0);
    CHECK_THROWS_AS(rstar_of_r(2.0, g), std::domain_error);
    CHECK_THROWS_AS(rstar_of_r(1.0, g), std::domain_error);
    CHECK_THROWS(r_of_rstar(std::numeric_limits<double>::quiet_NaN(), g));
}

TEST_CASE("roundtrip r -> r* -> r") {
    const Geometry g(1.0);
    for (int i = 0; i < 2000; ++i) {
        const double r = 2.0 * (1.0 + 1e-6) * std::pow(1e6 / (2.0 * (1.0 + 1e-6)), i / 1999.0);
        const double back = r_of_rstar(rstar_of_r(r, g), g);
        CHECK(std::abs(back - r) <= 1e-10 * std::max(1.0, r));
    }
}

TEST_CASE("deep near-horizon points keep 1 - mu accurate") {
    const Geometry g(1.0);
    for (const double rs : {-50.0, -200.0, -600.0}) {
        const RadialPoint p = point_at_rstar(rs, g);
        // r itself rounds to 2M once r - 2M drops below an ulp
        CHECK(p.r >= 2.0);
        CHECK(p.one_minus_mu > 0.0);
        // ln(r - 2) ~ (r* - r + 3)/2 near the horizon
        const double expected = std::exp((rs - p.r + 3.0) / 2.0) / p.r;
        CHECK(p.one_minus_mu == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("radial point invariants") {
    const Geometry g(2.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-300.0, 3000.0);
    for (int i = 0; i < 500; ++i) {
        const RadialPoint p = point_at_rstar(u(rng), g);
        CHECK(p.r >= 4.0);
        CHECK(p.mu > 0.0);
        CHECK(p.mu <= 1.0);
        CHECK(p.one_minus_mu > 0.0);
        CHECK(p.one_minus_mu + p.mu == doctest::Approx(1.0).epsilon(1e-15));
        if (p.r_star < -120.0) continue;
        // dr*/dr = 1/(1 - mu) amplifies the rounding of r
        const RadialPoint q = point_at_r(p.r, g);
        const double tol = 1e-9 * std::max(1.0, std::abs(p.r_star)) +
                           8.0 * std::numeric_limits<double>::epsilon() * p.r / p.one_minus_mu;
        CHECK(std::abs(q.r_star - p.r_star) <= tol);
    }
}

TEST_CASE("tortoise coordinate is strictly increasing") {
    const Geometry g(1.0);
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 5000; ++i) {
        const double r = 2.0 + 1e-8 * std::pow(1e12, i / 5000.0);
        const double rs = rstar_of_r(r, g);
        CHECK(rs > prev);
        prev = rs;
    }
}

TEST_CASE("dr*/dr = 1/(1 - mu) and dmu/dr* = -(mu/r)(1 - mu) at second order") {
    const Geometry g(1.0);
    for (const double r : {2.5, 3.0, 7.0, 40.0}) {
        double errors[2];
        double mu_errors[2];
        for (int k = 0; k < 2; ++k) {
            const double h = 1e-2 / (1 << k);
            const double d = (rstar_of_r(r + h, g) - rstar_of_r(r - h, g)) / (2.0 * h);
            errors[k] = std::abs(d - 1.0 / (1.0 - 2.0 / r));
            const double rs = rstar_of_r(r, g);
            const double dmu = (point_at_rstar(rs + h, g).mu - point_at_rstar(rs - h, g).mu) / (2.0 * h);
            const double mu = 2.0 / r;
            mu_errors[k] = std::abs(dmu + mu / r * (1.0 - mu));
        }
        CHECK(errors[0] / errors[1] == doctest::Approx(4.0).epsilon(0.05));
        CHECK(mu_errors[0] / mu_errors[1] == doctest::Approx(4.0).epsilon(0.05));
    }
}

TEST_CASE("beta") {
    const Geometry g(1.0);
    const MultiplierParams params = make_params(100.0, g);
    // x = 0 sits at r* = alpha + sqrt(alpha)
    const RadialPoint p = point_at_rstar(params.x_offset, g);
    CHECK(beta(p, params) == doctest::Approx(p.one_minus_mu / p.r).epsilon(1e-14));
    const RadialPoint far = point_at_r(1e9, g);
    CHECK(std::abs(beta(far, params)) < 1e-8);
    const RadialPoint ps = point_at_r(3.0, g);
    const double x = -params.x_offset;
    CHECK(beta(ps, params) == doctest::Approx((1.0 / 3.0) / 3.0 - x / (1e4 + x * x)).epsilon(1e-14));
}

TEST_CASE("inversion error carries its trace") {
    const InversionError e("no convergence", {1.0, 2.0});
    CHECK(e.trace().size() == 2);
    CHECK(std::string(e.what()) == "no convergence");
}
