#include "doctest.h"

#include "morawetz/parallel.hpp"
#include "morawetz/scan.hpp"
#include "morawetz/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace morawetz;

namespace {

constexpr double kAlpha = 133.35214321633239;

const CheckRecord* find_record(const CertificationReport& rep, const std::string& name) {
    for (const CheckResult& c : rep.checks)
        for (const CheckRecord& r : c.records)
            if (r.name == name) return &r;
    return nullptr;
}

ConstantsConfig small_constants() {
    ConstantsConfig c;
    c.ell_max = 8;
    c.grid_points = 300;
    c.validation_samples = 3000;
    return c;
}

}  // namespace

TEST_CASE("grid builder and extremum search") {
    const double foci[] = {0.3};
    const std::vector<double> grid = build_grid(-1.0, 2.0, 31, foci, 10);
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    CHECK(std::adjacent_find(grid.begin(), grid.end()) == grid.end());
    CHECK(std::find(grid.begin(), grid.end(), 0.3) != grid.end());
    CHECK(grid.front() == -1.0);
    CHECK(grid.back() == 2.0);

    const Extremum m = minimize_on_grid([](double x) { return (x - 0.4123) * (x - 0.4123) + 1.0; }, grid);
    CHECK(m.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.location == doctest::Approx(0.4123).epsilon(1e-6));
    const Extremum mx = maximize_on_grid([](double x) { return std::sin(x); }, grid);
    CHECK(mx.location == doctest::Approx(1.5707963267948966).epsilon(1e-6));
    const Extremum gs = golden_section_minimum([](double x) { return std::cosh(x - 0.25); }, -3.0, 3.0);
    CHECK(gs.location == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("radial grid covers the range and clusters at the foci") {
    const double foci[] = {0.0, 50.0};
    const std::vector<double> grid = radial_grid(-200.0, 1e4, 400, foci, 1.0, 20);
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    CHECK(grid.front() == -200.0);
    CHECK(grid.back() == 1e4);
    CHECK(std::find(grid.begin(), grid.end(), 0.0) != grid.end());
    const auto near0 = std::count_if(grid.begin(), grid.end(), [](double x) { return std::abs(x) < 1e-3; });
    CHECK(near0 >= 10);
}

TEST_CASE("certification at the scanned alpha passes with stable margins") {
    const Geometry g(1.0);
    const VerifierConfig cfg;
    const CertificationReport rep = certify(kAlpha, g, cfg);
    CHECK(rep.verdict);
    CHECK(rep.worst_margin() > 0.0);
    CHECK(rep.c_star == doctest::Approx(choose_cstar(kAlpha, g)).epsilon(1e-15));
    REQUIRE(rep.checks.size() == 4);
    for (const CheckResult& c : rep.checks) {
        CHECK(c.passed);
        for (const CheckRecord& r : c.records) {
            if (r.kind != RecordKind::margin) continue;
            CHECK(r.min_margin > 0.0);
            CHECK(r.stable);
            CHECK(r.trace.size() == static_cast<std::size_t>(r.refinement_levels) + 1);
        }
    }
    const CheckRecord* cube = find_record(rep, "cube_right");
    REQUIRE(cube != nullptr);
    CHECK(cube->min_margin > 0.0);
}

TEST_CASE("small alpha is rejected") {
    const Geometry g(1.0);
    const CertificationReport rep = certify(1.0, g, VerifierConfig{});
    CHECK_FALSE(rep.verdict);
    CHECK(rep.worst_margin() < 0.0);
    const CertificationReport rep100 = certify(100.0, g, VerifierConfig{});
    CHECK_FALSE(rep100.verdict);
}

TEST_CASE("verdict requires strictly positive margins") {
    const Geometry g(1.0);
    const CertificationReport rep = certify(kAlpha, g, VerifierConfig{});
    for (const CheckResult& c : rep.checks) {
        bool all = true;
        for (const CheckRecord& r : c.records)
            if (r.kind == RecordKind::margin) all = all && r.passed && r.min_margin > 0.0;
        CHECK(c.passed == all);
    }
}

TEST_CASE("certification is reproducible and independent of the thread count") {
    const Geometry g(1.0);
    set_thread_count(1);
    const CertificationReport a = certify(kAlpha, g, VerifierConfig{});
    set_thread_count(4);
    const CertificationReport b = certify(kAlpha, g, VerifierConfig{});
    set_thread_count(0);
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
        REQUIRE(a.checks[i].records.size() == b.checks[i].records.size());
        for (std::size_t j = 0; j < a.checks[i].records.size(); ++j) {
            CHECK(a.checks[i].records[j].min_margin == b.checks[i].records[j].min_margin);
            CHECK(a.checks[i].records[j].argmin == b.checks[i].records[j].argmin);
        }
    }
}

TEST_CASE("margins are refinement-stable to 1% under one more halving") {
    const Geometry g(1.0);
    VerifierConfig cfg;
    cfg.refinements = 2;
    const CertificationReport rep = certify(kAlpha, g, cfg);
    for (const CheckResult& c : rep.checks) {
        for (const CheckRecord& r : c.records) {
            if (r.kind != RecordKind::margin || r.trace.size() < 2) continue;
            const double last = r.trace.back(), prev = r.trace[r.trace.size() - 2];
            CHECK_MESSAGE(std::abs(last - prev) <= 0.01 * std::abs(last), r.name);
        }
    }
}

TEST_CASE("scan finds the smallest passing alpha") {
    const Geometry g(1.0);
    AlphaScanConfig sc;
    sc.alpha_min = 100.0;
    sc.alpha_max = 1000.0;
    sc.per_decade = 8;
    const AlphaScanResult res = scan_alpha(sc, g, VerifierConfig{}, true);
    REQUIRE(res.certified.has_value());
    CHECK(res.reports[*res.certified].alpha == doctest::Approx(kAlpha).epsilon(1e-12));
    for (std::size_t i = 0; i < *res.certified; ++i) CHECK_FALSE(res.reports[i].verdict);
    CHECK(res.reports.size() == 9);
    for (std::size_t i = 1; i < res.reports.size(); ++i) CHECK(res.reports[i].alpha > res.reports[i - 1].alpha);
}

TEST_CASE("generalized ratio of 3x3 forms") {
    const double a[3][3] = {{2, 0, 0}, {0, 3, 0}, {0, 0, 1}};
    const double b[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 4}};
    const FormRatio fr = generalized_ratio(a, b);
    CHECK_FALSE(fr.indefinite);
    CHECK_FALSE(fr.unbounded);
    CHECK(fr.ratio == doctest::Approx(3.0).epsilon(1e-13));

    const double bad[3][3] = {{1, 0, 0}, {0, -1, 0}, {0, 0, 1}};
    CHECK(generalized_ratio(a, bad).indefinite);

    const double null_b[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 0}};
    CHECK(generalized_ratio(a, null_b).unbounded);
    const double a_zero_on_null[3][3] = {{1, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    const FormRatio ok = generalized_ratio(a_zero_on_null, null_b);
    CHECK_FALSE(ok.unbounded);
    CHECK(ok.ratio == doctest::Approx(1.0).epsilon(1e-13));

    // C B - A is semidefinite exactly at the returned ratio
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        double x[3][3], y[3][3], aa[3][3] = {}, bb[3][3] = {};
        for (auto& row : x) for (double& v : row) v = n(rng);
        for (auto& row : y) for (double& v : row) v = n(rng);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) {
                    aa[i][j] += x[i][k] * x[j][k];
                    bb[i][j] += y[i][k] * y[j][k];
                }
        const FormRatio r = generalized_ratio(aa, bb);
        REQUIRE_FALSE(r.indefinite);
        for (int s = 0; s < 200; ++s) {
            const double v[3] = {n(rng), n(rng), n(rng)};
            double qa = 0, qb = 0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    qa += v[i] * aa[i][j] * v[j];
                    qb += v[i] * bb[i][j] * v[j];
                }
            CHECK(r.ratio * qb - qa >= -1e-9 * (r.ratio * qb + qa));
        }
    }
}

TEST_CASE("l = 0 ratio of controlled to K is alpha^2/(2 C_*) at every radius") {
    const Geometry g(1.0);
    const MultiplierParams params = make_params(kAlpha, g);
    const double expected = kAlpha * kAlpha / (2.0 * params.c_star);
    for (const double rs : {-150.0, -10.0, 0.0, 3.0, 500.0}) {
        const FormRatio fr = point_ratio(ConstantKind::prop2, 0, point_at_rstar(rs, g), params);
        CHECK(fr.ratio == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("forms agree with the jet evaluation") {
    const Geometry g(1.0);
    const MultiplierParams params = make_params(kAlpha, g);
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const int ell = i % 10;
        const RadialPoint p = point_at_rstar(-40.0 + i, g);
        double kf[3][3], cf[3][3];
        k_form(ell, p, params, false, kf);
        controlled_form(ell, p, true, cf);
        const double v[3] = {n(rng), n(rng), n(rng)};
        const SphereJet j = mode_to_jet(ModeState{ell, v[0], v[1], v[2]}, p);
        double qk = 0, qc = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                qk += v[a] * kf[a][b] * v[b];
                qc += v[a] * cf[a][b] * v[b];
            }
        const double k = k_combined_sphere(j, p, params).total;
        CHECK(qk == doctest::Approx(k).epsilon(1e-9).scale(std::abs(k) + 1e-14));
        CHECK(qc == doctest::Approx(controlled_sphere(j, p, true)).epsilon(1e-9));
    }
}

TEST_CASE("best constant for the first coercivity bound") {
    const Geometry g(1.0);
    const MultiplierParams params = make_params(kAlpha, g);
    const BestConstantReport rep = best_constant(ConstantKind::prop2, params, g, small_constants());
    CHECK(rep.finite);
    CHECK(std::isfinite(rep.constant));
    CHECK(rep.ell0_ratio == doctest::Approx(rep.ell0_expected).epsilon(1e-10));
    CHECK(rep.per_ell.size() == 10);
    for (const RatioSample& s : rep.per_ell) CHECK(rep.constant >= s.ratio);
    CHECK(rep.worst_violation >= -1e-10);
    CHECK(rep.validation_samples == 3000);
    // the sup sits at the photon sphere
    CHECK(std::abs(rep.argmax.r - 3.0) < 1e-3);
}

TEST_CASE("best constant is deterministic for a fixed seed") {
    const Geometry g(1.0);
    const MultiplierParams params = make_params(kAlpha, g);
    const BestConstantReport a = best_constant(ConstantKind::prop2, params, g, small_constants());
    set_thread_count(3);
    const BestConstantReport b = best_constant(ConstantKind::prop2, params, g, small_constants());
    set_thread_count(0);
    CHECK(a.constant == b.constant);
    CHECK(a.worst_violation == b.worst_violation);
}

TEST_CASE("the auxiliary combination has no finite constant") {
    const Geometry g(1.0);
    const MultiplierParams params = make_params(kAlpha, g);
    const BestConstantReport rep = best_constant(ConstantKind::prop3, params, g, small_constants());
    CHECK_FALSE(rep.finite);
    CHECK(std::isinf(rep.constant));
    REQUIRE(rep.indefinite_at.has_value());
    CHECK_FALSE(rep.diagnostic.empty());
    // K + K^aux is negative on pure time-derivative data: K^aux contributes -u_t^2/(2 r^4)
    double kf[3][3];
    k_form(0, point_at_r(10.0, g), params, true, kf);
    CHECK(kf[2][2] < 0.0);
}

TEST_CASE("profile rows cover each check") {
    const Geometry g(1.0);
    const std::vector<ProfileRow> rows = profile_checks(make_params(kAlpha, g), g, VerifierConfig{}, 50);
    CHECK(rows.size() >= 4 * 50);
    for (const ProfileRow& r : rows) CHECK(std::isfinite(r.location));
}
