#include "doctest.h"

#include "morawetz/currents.hpp"

#include <cmath>
#include <random>

using namespace morawetz;

namespace {

SphereJet random_mode_jet(std::mt19937_64& rng, int ell, const RadialPoint& p) {
    std::normal_distribution<double> n(0.0, 1.0);
    return mode_to_jet(ModeState{ell, n(rng), n(rng), n(rng)}, p);
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("angular coefficient equals mu'/(2(1-mu)) + (1-mu)/r and (r-3M)/r^2") {
    const Geometry g(1.0);
    for (int i = 0; i < 1000; ++i) {
        const RadialPoint p = point_at_rstar(-100.0 + 0.5 * i, g);
        const double dmu = -(p.mu / p.r) * p.one_minus_mu;
        const double lhs = dmu / (2.0 * p.one_minus_mu) + p.one_minus_mu / p.r;
        const double c = angular_coefficient(p);
        CHECK(std::abs(lhs - c) <= 1e-14 * (std::abs(dmu / (2.0 * p.one_minus_mu)) + p.one_minus_mu / p.r));
        CHECK(std::abs(c - (p.r - 3.0) / (p.r * p.r)) <= 1e-14 * (1.0 / p.r));
    }
}

TEST_CASE("mode jets: l = 0 has no angular content") {
    const Geometry g(1.0);
    const RadialPoint p = point_at_r(5.0, g);
    const SphereJet j = mode_to_jet(ModeState{0, 1.3, -0.4, 2.0}, p);
    CHECK(j.phi.mang == 0.0);
    CHECK(j.hess == 0.0);
    CHECK(j.omega.m00 == 0.0);
    CHECK(j.omega.mrr == 0.0);
    CHECK(j.omega.mang == 0.0);
    CHECK(j.phi.m00 == doctest::Approx(1.69));
    CHECK_THROWS_AS(mode_to_jet(ModeState{-1, 1.0, 0.0, 0.0}, p), std::invalid_argument);
}

TEST_CASE("mode jets: l = 1 closed values and the Poincare factor lambda/2") {
    const Geometry g(1.0);
    const RadialPoint p = point_at_r(4.0, g);
    const SphereJet j = mode_to_jet(ModeState{1, 1.0, 0.0, 0.0}, p);
    CHECK(j.phi.mang == doctest::Approx(2.0 / 16.0));
    CHECK(j.omega.m00 == doctest::Approx(2.0));
    for (int ell = 1; ell <= 40; ++ell) {
        const SphereJet k = mode_to_jet(ModeState{ell, 0.7, 0.1, 0.2}, p);
        const double lambda = ell * (ell + 1.0);
        CHECK(p.r * p.r * k.omega.mang / (2.0 * k.omega.m00) == doctest::Approx(lambda / 2.0));
    }
}

TEST_CASE("random mode jets satisfy the jet invariants") {
    const Geometry g(1.0);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> ell(0, 64);
    std::uniform_real_distribution<double> rs(-200.0, 2000.0);
    for (int i = 0; i < 5000; ++i) {
        const RadialPoint p = point_at_rstar(rs(rng), g);
        CHECK(satisfies_jet_invariants(random_mode_jet(rng, ell(rng), p), p));
    }
}

TEST_CASE("invariant violations are detected") {
    const Geometry g(1.0);
    const RadialPoint p = point_at_r(4.0, g);
    SphereJet j = mode_to_jet(ModeState{2, 1.0, 0.5, 0.2}, p);
    SphereJet bad = j;
    bad.phi.m0r = 10.0;
    CHECK_FALSE(satisfies_jet_invariants(bad, p));
    bad = j;
    bad.omega.m00 *= 1.5;
    CHECK_FALSE(satisfies_jet_invariants(bad, p));
    bad = j;
    bad.phi.mrr = -1.0;
    CHECK_FALSE(satisfies_jet_invariants(bad, p));
    bad = j;
    bad.omega.mang = 0.1 * bad.omega.mang;
    CHECK_FALSE(satisfies_jet_invariants(bad, p));
}

TEST_CASE("every sphere density is exactly quadratic") {
    const Geometry g(1.0);
    const MultiplierParams params = make_params(133.0, g);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const RadialPoint p = point_at_rstar(-50.0 + i, g);
        const int ell = i % 12;
        std::normal_distribution<double> n(0.0, 1.0);
        const ModeState m{ell, n(rng), n(rng), n(rng)};
        const ModeState m2{ell, 2 * m.u, 2 * m.ur, 2 * m.ut};
        const SphereJet j = mode_to_jet(m, p), j2 = mode_to_jet(m2, p);
        CHECK(close(k_combined_sphere(j2, p, params).total, 4.0 * k_combined_sphere(j, p, params).total, 1e-13));
        CHECK(close(k_aux_sphere(j2, p), 4.0 * k_aux_sphere(j, p), 1e-13));
        CHECK(close(lower_bound_sphere(j2, p, params), 4.0 * lower_bound_sphere(j, p, params), 1e-13));
        CHECK(close(controlled_sphere(j2, p, true), 4.0 * controlled_sphere(j, p, true), 1e-13));
        for (const CurrentKind c : {CurrentKind::J, CurrentKind::J_aux, CurrentKind::J_T}) {
            CHECK(close(flux_components(j2, p, params, c).time, 4.0 * flux_components(j, p, params, c).time, 1e-13));
            CHECK(close(flux_components(j2, p, params, c).rstar, 4.0 * flux_components(j, p, params, c).rstar, 1e-13));
        }
    }
}

TEST_CASE("combined divergence: parts sum to the total and the Lagrangian part vanishes") {
    const Geometry g(1.0);
    const MultiplierParams params = make_params(133.0, g);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        const RadialPoint p = point_at_rstar(-200.0 + 2.0 * i, g);
        const CombinedDivergence k = k_combined_sphere(random_mode_jet(rng, i % 9, p), p, params);
        CHECK(close(k.parts.sum_of_parts(), k.total, 1e-13));
        const double scale = std::abs(k.parts.rr_square) + std::abs(k.parts.angular) + std::abs(k.parts.f_term) +
                             std::abs(k.parts.completed_square) + std::abs(k.parts.zeroth_order) + 1e-300;
        CHECK(std::abs(k.parts.lagrangian) <= 1e-12 * scale);
        CHECK(k.parts.aux == 0.0);
    }
}

TEST_CASE("kv1 and kv0 agree when the Lagrangian weight vanishes") {
    const Geometry g(1.0);
    const MultiplierParams params = make_params(50.0, g);
    const RadialPoint p = point_at_r(6.0, g);
    const SphereJet j = mode_to_jet(ModeState{3, 0.3, -1.2, 0.8}, p);
    const MultiplierEval fa = f_a(p, params);
    CHECK(close(kv0_sphere(j.phi, fa, p), kv1_sphere(j.phi, fa, p), 1e-12));
}

TEST_CASE("K^aux time-derivative coefficient is -1/(2 r^4)") {
    const Geometry g(1.0);
    for (const double r : {2.1, 3.0, 10.0, 1000.0}) {
        const RadialPoint p = point_at_r(r, g);
        CHECK(k_aux_dt_coefficient(p) == doctest::Approx(-0.5 / (r * r * r * r)).epsilon(1e-13));
        const SphereJet only_dt = mode_to_jet(ModeState{0, 0.0, 0.0, 1.0}, p);
        CHECK(k_aux_sphere(only_dt, p) == doctest::Approx(r * r * k_aux_dt_coefficient(p)).epsilon(1e-13));
    }
}

TEST_CASE("controlled density is nonnegative and zero for zero data") {
    const Geometry g(1.0);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
        const RadialPoint p = point_at_rstar(-100.0 + i, g);
        const SphereJet j = random_mode_jet(rng, i % 20, p);
        CHECK(controlled_sphere(j, p, false) >= 0.0);
        CHECK(controlled_sphere(j, p, true) >= controlled_sphere(j, p, false));
    }
    const RadialPoint p = point_at_r(3.0, g);
    const MultiplierParams params = make_params(100.0, g);
    const SphereJet zero{};
    CHECK(controlled_sphere(zero, p, true) == 0.0);
    CHECK(k_combined_sphere(zero, p, params).total == 0.0);
    CHECK(flux_components(zero, p, params, CurrentKind::J).time == 0.0);
}

TEST_CASE("energy flux density is nonnegative") {
    const Geometry g(1.0);
    std::mt19937_64 rng(23);
    const MultiplierParams params = make_params(100.0, g);
    for (int i = 0; i < 300; ++i) {
        const RadialPoint p = point_at_rstar(-100.0 + i, g);
        const SphereJet j = random_mode_jet(rng, i % 7, p);
        const FluxComponents f = flux_components(j, p, params, CurrentKind::J_T);
        CHECK(f.time >= 0.0);
        // null fluxes time -/+ rstar are nonnegative for the energy current
        CHECK(f.time - std::abs(f.rstar) >= -1e-12 * f.time);
    }
}

TEST_CASE("box of the Lagrangian weight for f = r^p vanishes where expected") {
    // For f = r^{-2} the weight f' + 2(1-mu)f/r is identically zero, so its box is too.
    const Geometry g(1.0);
    for (const double r : {2.5, 3.0, 8.0}) {
        const RadialPoint p = point_at_r(r, g);
        const MultiplierEval f = power_multiplier(p, 1.0, -2.0);
        CHECK(std::abs(box_lagrangian(f, p)) <= 1e-14);
    }
}
