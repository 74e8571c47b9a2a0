#include "morawetz/verifier.hpp"

#include "morawetz/parallel.hpp"
#include "morawetz/scan.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace morawetz {

namespace {

constexpr double kNearHorizonSplit = 60.0;  // in units of M

using Builder = std::function<std::vector<double>(int points)>;
using Fn = std::function<double(double)>;

double effective_r_max(double r_max_in_m, const MultiplierParams& params, const Geometry& g) {
    return std::max(r_max_in_m * g.mass(), 20.0 * params.alpha);
}

CheckRecord scan_record(std::string name, std::string description, std::string coordinate, RecordKind kind,
                        double lo, double hi, const Fn& margin, const Builder& builder,
                        const VerifierConfig& cfg, bool maximize = false) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.description = std::move(description);
    rec.coordinate = std::move(coordinate);
    rec.kind = kind;
    rec.lo = lo;
    rec.hi = hi;
    rec.refinement_levels = cfg.refinements;
    Extremum e;
    for (int level = 0; level <= cfg.refinements; ++level) {
        const std::vector<double> grid = builder(cfg.grid_points << level);
        rec.grid_points = static_cast<int>(grid.size());
        e = maximize ? maximize_on_grid(margin, grid) : minimize_on_grid(margin, grid);
        rec.trace.push_back(e.value);
    }
    rec.min_margin = e.value;
    rec.argmin = e.location;
    if (rec.trace.size() >= 2) {
        const double last = rec.trace.back();
        const double prev = rec.trace[rec.trace.size() - 2];
        rec.stable = std::abs(last - prev) <= cfg.stability_tolerance * std::abs(last);
    }
    rec.passed = std::isfinite(rec.min_margin) && rec.stable &&
                 (kind == RecordKind::report || rec.min_margin > 0.0);
    return rec;
}

CheckRecord point_record(std::string name, std::string description, RecordKind kind, double location,
                         double value, bool passed) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.description = std::move(description);
    rec.coordinate = "-";
    rec.kind = kind;
    rec.lo = rec.hi = rec.argmin = location;
    rec.grid_points = 1;
    rec.trace = {value};
    rec.min_margin = value;
    rec.passed = passed;
    return rec;
}

CheckResult finish(std::string name, std::vector<CheckRecord> records) {
    CheckResult out;
    out.name = std::move(name);
    out.records = std::move(records);
    out.passed = std::all_of(out.records.begin(), out.records.end(),
                             [](const CheckRecord& r) { return r.kind == RecordKind::report || r.passed; });
    return out;
}

Builder rstar_builder(double lo, double hi, std::vector<double> foci, const Geometry& g, int levels) {
    return [=](int points) { return radial_grid(lo, hi, points, foci, g.mass(), levels); };
}

Builder uniform_builder(double lo, double hi, std::vector<double> foci, int levels) {
    return [=](int points) { return build_grid(lo, hi, points, foci, levels); };
}

double ratio_expression(double x, double alpha) {
    const double s = x + alpha + std::sqrt(alpha);
    const double d = x * x + alpha * alpha;
    return (alpha - x) * s * s * s / (4.0 * d * d);
}

}  // namespace

std::vector<double> radial_grid(double rstar_lo, double rstar_hi, int points, std::span<const double> foci,
                                double mass, int focus_levels) {
    if (!(rstar_hi > rstar_lo) || points < 2) throw std::invalid_argument("radial_grid: empty interval");
    const Geometry g(mass);
    const double split = kNearHorizonSplit * mass;
    std::vector<double> grid;
    const double near_hi = std::min(rstar_hi, split);
    if (near_hi > rstar_lo) {
        grid = build_grid(rstar_lo, near_hi, points, foci, focus_levels);
    }
    if (rstar_hi > split) {
        const double far_lo = std::max(rstar_lo, split);
        const double r_lo = r_of_rstar(far_lo, g);
        const double r_hi = r_of_rstar(rstar_hi, g);
        const double log_lo = std::log(r_lo);
        const double step = (std::log(r_hi) - log_lo) / (points - 1);
        for (int i = 0; i < points; ++i) {
            const double r = i == points - 1 ? r_hi : std::exp(log_lo + step * i);
            grid.push_back(i == 0 ? far_lo : i == points - 1 ? rstar_hi : rstar_of_r(r, g));
        }
        const std::vector<double> around = build_grid(far_lo, rstar_hi, 2, foci, focus_levels);
        grid.insert(grid.end(), around.begin(), around.end());
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

double CertificationReport::worst_margin() const noexcept {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& c : checks) {
        for (const auto& r : c.records) {
            if (r.kind == RecordKind::margin) worst = std::min(worst, r.min_margin);
        }
    }
    return worst;
}

CheckResult check_suffices2(const MultiplierParams& params, const Geometry& g, const VerifierConfig& cfg) {
    const double m = g.mass();
    const double lo = cfg.rstar_min * m;
    const double hi = rstar_of_r(effective_r_max(cfg.r_max, params, g), g);
    const std::vector<double> foci = {0.0, params.x_offset - params.alpha, params.x_offset,
                                      params.x_offset + params.alpha};
    const Builder builder = rstar_builder(lo, hi, foci, g, cfg.focus_levels);

    std::vector<CheckRecord> records;
    records.push_back(scan_record(
        "suffices2", "min of 2 f^b (r-3M) r^2 + H + F r^6", "r*", RecordKind::margin, lo, hi,
        [&](double rs) { return suffices2_lhs(point_at_rstar(rs, g), params, g); }, builder, cfg));
    records.push_back(scan_record(
        "suffices2_normalized", "min of the left side over the sum of the absolute values of its terms",
        "r*", RecordKind::report, lo, hi,
        [&](double rs) {
            const RadialPoint p = point_at_rstar(rs, g);
            const double r2 = p.r * p.r;
            const double t1 = 2.0 * f_b(p, params).f * (p.r - 3.0 * m) * r2;
            const double t2 = H_at(p, params, g);
            const double t3 = big_F(p, params) * r2 * r2 * r2;
            const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
            return scale > 0.0 ? (t1 + t2 + t3) / scale : 0.0;
        },
        builder, cfg));
    CheckRecord first = scan_record(
        "suffices2_first_term", "min of 2 f^b (r-3M) r^2 (zero at the photon sphere)", "r*", RecordKind::report,
        lo, hi,
        [&](double rs) {
            const RadialPoint p = point_at_rstar(rs, g);
            return 2.0 * f_b(p, params).f * (p.r - 3.0 * m) * p.r * p.r;
        },
        builder, cfg);
    first.passed = first.min_margin >= 0.0;
    records.push_back(std::move(first));

    const RadialPoint p3 = point_at_rstar(0.0, g);
    const double at3 = suffices2_lhs(p3, params, g);
    const double f_part = big_F(p3, params) * std::pow(p3.r, 6);
    records.push_back(point_record("suffices2_photon_sphere",
                                   "left side minus F r^6 at r = 3M (f^b and H vanish there)",
                                   RecordKind::report, 0.0, at3 - f_part,
                                   std::abs(at3 - f_part) <= cfg.identity_tolerance * std::max(1.0, f_part)));
    return finish("suffices2", std::move(records));
}

CheckResult check_H(const MultiplierParams& params, const Geometry& g, const VerifierConfig& cfg) {
    const double m = g.mass();
    const double alpha = params.alpha;
    const double r_inner = 8.0 * m / 3.0;
    const double r_split = cfg.split_radius * m;
    const double r_far = effective_r_max(cfg.r_max, params, g);
    const double rs_lo = cfg.rstar_min * m;
    const double rs_inner = rstar_of_r(r_inner, g);
    const double rs_split = rstar_of_r(r_split, g);
    const double rs_far = rstar_of_r(r_far, g);
    std::vector<CheckRecord> records;

    records.push_back(scan_record(
        "H_inner", "min of H on (2M, 8M/3]", "r*", RecordKind::margin, rs_lo, rs_inner,
        [&](double rs) { return H_at(point_at_rstar(rs, g), params, g); },
        rstar_builder(rs_lo, rs_inner, {}, g, cfg.focus_levels), cfg));

    const double h3 = H_of_r(3.0 * m, params, g);
    const double dh3 = dH_dr(3.0 * m, params, g);
    records.push_back(point_record("H_photon_sphere", "tolerance minus |H(3M)|", RecordKind::margin, 3.0 * m,
                                   cfg.identity_tolerance - std::abs(h3),
                                   cfg.identity_tolerance - std::abs(h3) > 0.0));
    records.push_back(point_record("dH_photon_sphere", "tolerance minus |dH/dr(3M)|", RecordKind::margin,
                                   3.0 * m, cfg.identity_tolerance - std::abs(dh3),
                                   cfg.identity_tolerance - std::abs(dh3) > 0.0));

    const double a2 = alpha * alpha;
    const std::vector<double> photon = {3.0 * m};
    const Builder r_builder = uniform_builder(r_inner, r_split, photon, cfg.focus_levels);
    records.push_back(scan_record(
        "d2H_convexity", "min of alpha^2 d^2H/dr^2 on [8M/3, R] (the constant c)", "r", RecordKind::margin,
        r_inner, r_split, [&](double r) { return a2 * d2H_dr2(r, params, g); }, r_builder, cfg));

    const auto combination = [&](double r) {
        const RadialPoint p = point_at_r(r, g);
        const double a = p.one_minus_mu;
        const double f1 = f_b(p, params).f1;
        return 4.0 * m * f1 * (3.0 * r - 4.0 * m) / a -
               2.0 * m * m * f1 * (3.0 * r * r - 8.0 * m * r) / (r * r * a * a);
    };
    const auto lower_form = [&](double r, double c1, double c2, double c0) {
        const RadialPoint p = point_at_r(r, g);
        const double f1 = f_b(p, params).f1;
        return 2.0 * m * f1 / (r * p.one_minus_mu) * (c2 * r * r + c1 * m * r + c0 * m * m);
    };
    records.push_back(scan_record(
        "f1_combination", "min of alpha^2 (2M (f^b)'/(r(1-mu)))(6r^2 - 20Mr + 32M^2) on [8M/3, R]", "r",
        RecordKind::margin, r_inner, r_split, [&](double r) { return a2 * lower_form(r, -20.0, 6.0, 32.0); },
        r_builder, cfg));
    CheckRecord reduction = scan_record(
        "f1_combination_reduction",
        "min of alpha^2 [(f^b)' terms of d^2H/dr^2 - (2M (f^b)'/(r(1-mu)))(6r^2 - 20Mr + 32M^2)], using 1-mu >= 1/4",
        "r", RecordKind::report, r_inner, r_split,
        [&](double r) { return a2 * (combination(r) - lower_form(r, -20.0, 6.0, 32.0)); }, r_builder, cfg);
    reduction.passed = reduction.min_margin >= -1e-9;
    records.push_back(std::move(reduction));
    CheckRecord printed = scan_record(
        "f1_combination_16M_form",
        "min of alpha^2 [(f^b)' terms of d^2H/dr^2 - (2M (f^b)'/(r(1-mu)))(6r^2 - 16Mr + 32M^2)]", "r",
        RecordKind::report, r_inner, r_split,
        [&](double r) { return a2 * (combination(r) - lower_form(r, -16.0, 6.0, 32.0)); }, r_builder, cfg);
    printed.passed = printed.min_margin >= -1e-9;
    records.push_back(std::move(printed));
    records.push_back(scan_record(
        "inner_combination", "min of alpha^2 (2M (f^b)'/(r(1-mu)))(9r^2 - 29Mr + 32M^2) on [8M/3, 3M]", "r",
        RecordKind::margin, r_inner, 3.0 * m, [&](double r) { return a2 * lower_form(r, -29.0, 9.0, 32.0); },
        uniform_builder(r_inner, 3.0 * m, {}, cfg.focus_levels), cfg));

    const auto discriminant_record = [&](const char* name, double c2, double c1, double c0) {
        const double disc = (c1 * c1 - 4.0 * c2 * c0) * m * m;
        return point_record(name,
                            fmt::format("minus the discriminant of {}r^2 {:+}Mr {:+}M^2, over M^2", c2, c1, c0),
                            RecordKind::margin, 0.0, -disc / (m * m), disc < 0.0);
    };
    records.push_back(discriminant_record("quadratic_discriminant", 6.0, -16.0, 32.0));
    records.push_back(discriminant_record("quadratic_discriminant_20M", 6.0, -20.0, 32.0));
    records.push_back(discriminant_record("quadratic_discriminant_inner", 9.0, -29.0, 32.0));

    records.push_back(scan_record(
        "fb_second_derivative_term", "max of alpha^3 |M (f^b)'' (3r^2 - 8Mr)/(1-mu)^2| on [8M/3, R]", "r",
        RecordKind::report, r_inner, r_split,
        [&](double r) {
            const RadialPoint p = point_at_r(r, g);
            const double a = p.one_minus_mu;
            return a2 * alpha * std::abs(m * f_b(p, params).f2 * (3.0 * r * r - 8.0 * m * r) / (a * a));
        },
        r_builder, cfg, true));

    const double f1_at_3 = f_b(point_at_r(3.0 * m, g), params).f1;
    records.push_back(scan_record(
        "fb_first_derivative_drift", "max of alpha^3 |(f^b)'(3M) - (f^b)'(r)| on [8M/3, 3M]", "r",
        RecordKind::report, r_inner, 3.0 * m,
        [&](double r) { return a2 * alpha * std::abs(f1_at_3 - f_b(point_at_r(r, g), params).f1); },
        uniform_builder(r_inner, 3.0 * m, {}, cfg.focus_levels), cfg, true));

    const double c_bound =
        fb_lower_bound_constant(params, g, r_split, r_far, cfg.grid_points << cfg.refinements);
    records.push_back(point_record("fb_bound_constant", "largest c with f^b >= (c/alpha) min{r/alpha, 1} on [R, R_max]",
                                   RecordKind::report, r_split, c_bound, c_bound > 0.0));

    const Builder far_builder = rstar_builder(rs_split, rs_far, {params.x_offset}, g, cfg.focus_levels);
    records.push_back(scan_record(
        "H_outer", "min of H on [R, R_max]", "r*", RecordKind::margin, rs_split, rs_far,
        [&](double rs) { return H_at(point_at_rstar(rs, g), params, g); }, far_builder, cfg));
    records.push_back(scan_record(
        "H_outer_bound", "min of (cM/alpha)(3r^2 - 8Mr) min{r/alpha, 1} - 2 C_* (r-3M)/alpha^2 on [R, R_max]",
        "r*", RecordKind::margin, rs_split, rs_far,
        [&](double rs) {
            const double r = r_of_rstar(rs, g);
            return c_bound * m / alpha * (3.0 * r * r - 8.0 * m * r) * std::min(r / alpha, 1.0) -
                   2.0 * params.c_star * (r - 3.0 * m) / a2;
        },
        far_builder, cfg));
    return finish("H", std::move(records));
}

CheckResult check_ratio(const MultiplierParams& params, const VerifierConfig& cfg) {
    const double alpha = params.alpha;
    const double sq = std::sqrt(alpha);
    const std::vector<double> foci = {-alpha, 0.0, alpha};
    const Builder full = uniform_builder(-alpha, alpha, foci, cfg.focus_levels);
    const Builder left = uniform_builder(-alpha, 0.0, foci, cfg.focus_levels);
    const Builder right = uniform_builder(0.0, alpha, foci, cfg.focus_levels);
    const double right_bound = (2.0 / 7.0) * std::pow(2.0, 1.5);
    std::vector<CheckRecord> records;

    records.push_back(scan_record("ratio", "9/10 minus the ratio, minimized over [-alpha, alpha]", "x",
                                  RecordKind::margin, -alpha, alpha,
                                  [&](double x) { return 0.9 - ratio_expression(x, alpha); }, full, cfg));
    records.push_back(scan_record("ratio_left", "3/4 minus the ratio on [-alpha, 0]", "x", RecordKind::margin,
                                  -alpha, 0.0, [&](double x) { return 0.75 - ratio_expression(x, alpha); },
                                  left, cfg));
    records.push_back(scan_record("ratio_right", "(2/7) 2^{3/2} minus the ratio on [0, alpha]", "x",
                                  RecordKind::margin, 0.0, alpha,
                                  [&](double x) { return right_bound - ratio_expression(x, alpha); }, right, cfg));
    records.push_back(point_record("ratio_right_constant", "9/10 - (2/7) 2^{3/2}", RecordKind::margin, 0.0,
                                   0.9 - right_bound, 0.9 - right_bound > 0.0));
    records.push_back(scan_record(
        "cube_left", "relative slack in (x + alpha + alpha^{1/2})^3 < (3/2) alpha^3 on [-alpha, 0]", "x",
        RecordKind::margin, -alpha, 0.0,
        [&](double x) {
            const double s = (x + alpha + sq) / alpha;
            return 1.0 - s * s * s / 1.5;
        },
        left, cfg));
    records.push_back(scan_record(
        "cube_right",
        "relative slack in (x + alpha + alpha^{1/2})^3 < 2^{3/2} (8/7) (x^2 + alpha^2)^{3/2} on [0, alpha]", "x",
        RecordKind::margin, 0.0, alpha,
        [&](double x) {
            const double s = x + alpha + sq;
            const double bound = std::pow(2.0, 1.5) * (8.0 / 7.0) * std::pow(x * x + alpha * alpha, 1.5);
            return 1.0 - s * s * s / bound;
        },
        right, cfg));
    return finish("ratio", std::move(records));
}

CheckResult check_midrange_approx(const MultiplierParams& params, const Geometry& g,
                                  const VerifierConfig& cfg) {
    const double m = g.mass();
    const double alpha = params.alpha;
    const double a2 = alpha * alpha;
    const double sq = std::sqrt(alpha);
    const std::vector<double> foci = {-alpha, 0.0, alpha};
    const Builder builder = uniform_builder(-alpha, alpha, foci, cfg.focus_levels);
    const auto at_x = [&](double x) { return point_at_rstar(x + params.x_offset, g); };
    const auto fb_term = [&](const RadialPoint& p) {
        const double r2 = p.r * p.r;
        return 2.0 * f_b(p, params).f * (p.r - 3.0 * m) / (r2 * r2);
    };
    const auto fb_term_approx = [&](double x) {
        const double s = x + alpha + sq;
        return 2.0 * (x + alpha) / ((x * x + a2) * s * s * s);
    };
    const auto f_approx = [&](double x) {
        const double d = x * x + a2;
        return 0.5 * (x * x - a2) / (d * d * d);
    };
    std::vector<CheckRecord> records;

    records.push_back(scan_record(
        "midrange_exact", "min of 2 f^b (r-3M)/r^4 + F on [-alpha, alpha]", "x", RecordKind::margin, -alpha, alpha,
        [&](double x) {
            const RadialPoint p = at_x(x);
            return fb_term(p) + big_F(p, params);
        },
        builder, cfg));
    records.push_back(scan_record(
        "midrange_normalized", "min of (2 f^b (r-3M)/r^4 + F) (x^2 + alpha^2)^2 alpha", "x", RecordKind::report,
        -alpha, alpha,
        [&](double x) {
            const RadialPoint p = at_x(x);
            const double d = x * x + a2;
            return (fb_term(p) + big_F(p, params)) * d * d * alpha;
        },
        builder, cfg));

    const double f_scale = 0.5 / (a2 * a2 * a2);
    records.push_back(scan_record(
        "F_approx_deviation", "max of |F - (1/2)(x^2 - alpha^2)/(x^2 + alpha^2)^3| / |approximation|", "x",
        RecordKind::report, -alpha, alpha,
        [&](double x) {
            const double ap = f_approx(x);
            const double ex = big_F(at_x(x), params);
            return std::abs(ap) > 1e-3 * f_scale ? std::abs(ex - ap) / std::abs(ap) : 0.0;
        },
        builder, cfg, true));

    double term_scale = 0.0;
    for (const double x : build_grid(-alpha, alpha, 1001, foci, 4)) {
        term_scale = std::max(term_scale, std::abs(fb_term_approx(x)));
    }
    records.push_back(scan_record(
        "fb_term_approx_deviation",
        "max of |2 f^b (r-3M)/r^4 - 2(x+alpha)/((x^2+alpha^2)(x+alpha+alpha^{1/2})^3)| over the sup of the latter",
        "x", RecordKind::report, -alpha, alpha,
        [&](double x) { return std::abs(fb_term(at_x(x)) - fb_term_approx(x)) / term_scale; }, builder, cfg,
        true));

    records.push_back(scan_record(
        "r_over_sqrt_alpha", "min of r / alpha^{1/2} on [-alpha, alpha]", "x", RecordKind::report, -alpha, alpha,
        [&](double x) { return at_x(x).r / sq; }, builder, cfg));
    records.push_back(scan_record(
        "mu_sqrt_alpha", "max of mu alpha^{1/2} on [-alpha, alpha]", "x", RecordKind::report, -alpha, alpha,
        [&](double x) { return at_x(x).mu * sq; }, builder, cfg, true));
    return finish("midrange", std::move(records));
}

CertificationReport certify(double alpha, const Geometry& g, const VerifierConfig& cfg) {
    const MultiplierParams params = make_params(alpha, g);
    CertificationReport report;
    report.mass = g.mass();
    report.alpha = alpha;
    report.c_star = params.c_star;
    report.checks.push_back(check_suffices2(params, g, cfg));
    report.checks.push_back(check_H(params, g, cfg));
    report.checks.push_back(check_ratio(params, cfg));
    report.checks.push_back(check_midrange_approx(params, g, cfg));
    report.verdict = std::all_of(report.checks.begin(), report.checks.end(),
                                 [](const CheckResult& c) { return c.passed; });
    return report;
}

AlphaScanResult scan_alpha(const AlphaScanConfig& scan, const Geometry& g, const VerifierConfig& cfg,
                           bool exhaustive) {
    if (!(scan.alpha_min > 0.0) || !(scan.alpha_max >= scan.alpha_min) || scan.per_decade < 1) {
        throw std::invalid_argument("scan_alpha: invalid range");
    }
    AlphaScanResult out;
    const double decades = std::log10(scan.alpha_max / scan.alpha_min);
    const int steps = static_cast<int>(std::floor(decades * scan.per_decade + 1e-9));
    for (int k = 0; k <= steps; ++k) {
        const double alpha = scan.alpha_min * std::pow(10.0, static_cast<double>(k) / scan.per_decade);
        out.reports.push_back(certify(alpha, g, cfg));
        if (out.reports.back().verdict && !out.certified) {
            out.certified = out.reports.size() - 1;
            if (!exhaustive) break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Best constants

namespace {

using Matrix3 = Eigen::Matrix3d;

template <class Q>
void polarize(const Q& q, int ell, double (&out)[3][3]) {
    const auto state = [ell](double u, double ur, double ut) { return ModeState{ell, u, ur, ut}; };
    const ModeState basis[3] = {state(1, 0, 0), state(0, 1, 0), state(0, 0, 1)};
    double diag[3];
    for (int i = 0; i < 3; ++i) diag[i] = q(basis[i]);
    for (int i = 0; i < 3; ++i) {
        out[i][i] = diag[i];
        for (int j = i + 1; j < 3; ++j) {
            const ModeState s{ell, basis[i].u + basis[j].u, basis[i].ur + basis[j].ur, basis[i].ut + basis[j].ut};
            out[i][j] = out[j][i] = 0.5 * (q(s) - diag[i] - diag[j]);
        }
    }
}

/// Coefficients of lambda and lambda^2 in the jet of u Y_l; the lambda^0 part is
/// the jet at ell = 0.
void lambda_parts(const ModeState& s, const RadialPoint& p, SphereJet& first, SphereJet& second) {
    const SphereJet base = mode_to_jet(ModeState{0, s.u, s.ur, s.ut}, p);
    const double r2 = p.r * p.r;
    const double u2 = s.u * s.u;
    first = SphereJet{};
    first.phi.mang = u2 / r2;
    first.hess = -u2 / (r2 * r2);
    first.omega = base.phi;
    first.omega.mang = 0.0;
    second = SphereJet{};
    second.hess = u2 / (r2 * r2);
    second.omega.mang = u2 / r2;
}

Matrix3 cleaned(const double (&m)[3][3]) {
    Matrix3 out;
    double largest = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) largest = std::max(largest, std::abs(m[i][j]));
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) out(i, j) = std::abs(m[i][j]) <= 1e-15 * largest ? 0.0 : m[i][j];
    }
    return 0.5 * (out + out.transpose());
}

double k_value(const SphereJet& jet, const RadialPoint& p, const MultiplierParams& params, bool with_aux) {
    double k = k_combined_sphere(jet, p, params).total;
    if (with_aux) k += k_aux_sphere(jet, p);
    return k;
}

}  // namespace

void controlled_form(int ell, const RadialPoint& p, bool include_time_derivative, double (&out)[3][3]) {
    polarize([&](const ModeState& s) { return controlled_sphere(mode_to_jet(s, p), p, include_time_derivative); },
             ell, out);
}

void k_form(int ell, const RadialPoint& p, const MultiplierParams& params, bool with_aux, double (&out)[3][3]) {
    polarize([&](const ModeState& s) { return k_value(mode_to_jet(s, p), p, params, with_aux); }, ell, out);
}

FormRatio generalized_ratio(const double (&a)[3][3], const double (&b)[3][3]) {
    constexpr double kTol = 1e-13;
    const Matrix3 A = cleaned(a);
    const Matrix3 B = cleaned(b);
    Eigen::Vector3d d;
    for (int i = 0; i < 3; ++i) {
        const double s = std::sqrt(std::abs(A(i, i)) + std::abs(B(i, i)));
        d(i) = s > 0.0 ? 1.0 / s : 1.0;
    }
    const Matrix3 As = d.asDiagonal() * A * d.asDiagonal();
    const Matrix3 Bs = d.asDiagonal() * B * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix3> eb(Bs);
    const Eigen::Vector3d lam = eb.eigenvalues();
    const Matrix3 vec = eb.eigenvectors();
    const double top = std::max(lam.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    FormRatio out;
    if (lam(0) < -kTol * top) {
        out.indefinite = true;
        return out;
    }
    const double a_norm = std::max(As.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    std::vector<int> range;
    for (int i = 0; i < 3; ++i) {
        if (lam(i) > kTol * top) {
            range.push_back(i);
        } else {
            const Eigen::Vector3d v = vec.col(i);
            if (v.dot(As * v) > kTol * a_norm) {
                out.unbounded = true;
                return out;
            }
        }
    }
    if (range.empty()) return out;
    const int n = static_cast<int>(range.size());
    Eigen::MatrixXd w(3, n);
    for (int k = 0; k < n; ++k) w.col(k) = vec.col(range[k]) / std::sqrt(lam(range[k]));
    const Eigen::MatrixXd reduced = w.transpose() * As * w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(0.5 * (reduced + reduced.transpose()));
    out.ratio = std::max(0.0, er.eigenvalues().maxCoeff());
    return out;
}

FormRatio limit_ratio(ConstantKind kind, const RadialPoint& p, const MultiplierParams& params, double lambda_min) {
    const bool prop3 = kind == ConstantKind::prop3;
    double a0[3][3], a1[3][3], a2[3][3], b0[3][3], b1[3][3], b2[3][3];
    controlled_form(0, p, prop3, a0);
    k_form(0, p, params, prop3, b0);
    const auto part = [&](int which, bool controlled) {
        return [&, which, controlled](const ModeState& s) {
            SphereJet first, second;
            lambda_parts(s, p, first, second);
            const SphereJet& jet = which == 1 ? first : second;
            return controlled ? controlled_sphere(jet, p, prop3) : k_value(jet, p, params, prop3);
        };
    };
    polarize(part(1, true), 0, a1);
    polarize(part(2, true), 0, a2);
    polarize(part(1, false), 0, b1);
    polarize(part(2, false), 0, b2);
    FormRatio best;
    const double start = std::max(lambda_min, 1.0);
    for (int k = 0; start * std::pow(10.0, 0.25 * k) <= 1e12 * (1.0 + 1e-12) || k == 0; ++k) {
        const double lambda = start * std::pow(10.0, 0.25 * k);
        double a[3][3], b[3][3];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                a[i][j] = lambda * a2[i][j] + a1[i][j] + a0[i][j] / lambda;
                b[i][j] = lambda * b2[i][j] + b1[i][j] + b0[i][j] / lambda;
            }
        }
        const FormRatio fr = generalized_ratio(a, b);
        if (fr.indefinite || fr.unbounded) return fr;
        best.ratio = std::max(best.ratio, fr.ratio);
    }
    return best;
}

FormRatio point_ratio(ConstantKind kind, int ell, const RadialPoint& p, const MultiplierParams& params,
                      double limit_lambda_min) {
    if (ell < 0) return limit_ratio(kind, p, params, limit_lambda_min);
    const bool prop3 = kind == ConstantKind::prop3;
    double a[3][3];
    double b[3][3];
    controlled_form(ell, p, prop3, a);
    k_form(ell, p, params, prop3, b);
    return generalized_ratio(a, b);
}

BestConstantReport best_constant(ConstantKind kind, const MultiplierParams& params, const Geometry& g,
                                 const ConstantsConfig& cfg) {
    if (cfg.ell_min < 0 || cfg.ell_max < cfg.ell_min) throw std::invalid_argument("best_constant: empty ell range");
    const double m = g.mass();
    const double lo = cfg.rstar_min * m;
    const double hi = rstar_of_r(effective_r_max(cfg.r_max, params, g), g);
    const std::vector<double> foci = {0.0, params.x_offset - params.alpha, params.x_offset,
                                      params.x_offset + params.alpha};
    const std::vector<double> grid = radial_grid(lo, hi, cfg.grid_points, foci, m, cfg.focus_levels);

    BestConstantReport report;
    report.kind = kind;
    report.alpha = params.alpha;
    report.c_star = params.c_star;
    report.ell0_expected = kind == ConstantKind::prop2 ? params.alpha * params.alpha / (2.0 * params.c_star) : 0.0;
    report.grid = fmt::format("r* in [{:.17g}, {:.17g}], {} points (uniform to r* = {} M, log-spaced in r beyond), "
                              "ell in [{}, {}]{}",
                              lo, hi, grid.size(), kNearHorizonSplit, cfg.ell_min, cfg.ell_max,
                              cfg.include_limit ? " plus the large-ell limit" : "");

    const double tail = static_cast<double>(cfg.ell_max + 1) * (cfg.ell_max + 2);
    std::vector<int> ells;
    for (int l = cfg.ell_min; l <= cfg.ell_max; ++l) ells.push_back(l);
    if (cfg.include_limit) ells.push_back(-1);

    std::vector<RadialPoint> points(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { points[i] = point_at_rstar(grid[i], g); });

    // Per-ell grid scan; indefinite or unbounded points are recorded separately.
    struct Scan {
        std::vector<double> ratios;
        std::optional<RatioSample> bad;
        bool unbounded = false;
    };
    std::vector<Scan> scans(ells.size());
    parallel_for(ells.size(), [&](std::size_t e) {
        Scan& s = scans[e];
        s.ratios.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const FormRatio fr = point_ratio(kind, ells[e], points[i], params, tail);
            if (fr.indefinite || fr.unbounded) {
                s.ratios[i] = std::numeric_limits<double>::infinity();
                if (!s.bad) {
                    s.bad = RatioSample{ells[e], grid[i], points[i].r, std::numeric_limits<double>::infinity()};
                    s.unbounded = fr.unbounded;
                }
            } else {
                s.ratios[i] = fr.ratio;
            }
        }
    });

    for (std::size_t e = 0; e < ells.size(); ++e) {
        if (!scans[e].bad) continue;
        const RatioSample where = *scans[e].bad;
        const std::string what = fmt::format(
            "{} form {} at ell = {}, r* = {:.17g}, r = {:.17g}", kind == ConstantKind::prop2 ? "K" : "K + K^aux",
            scans[e].unbounded ? "degenerate where the controlled form is not" : "not positive semidefinite",
            where.ell, where.r_star, where.r);
        if (kind == ConstantKind::prop2 && !scans[e].unbounded) throw NotSemidefiniteError(what, where);
        if (!report.indefinite_at) {
            report.indefinite_at = where;
            report.diagnostic = what;
        }
    }
    if (report.indefinite_at) {
        report.finite = false;
        report.constant = std::numeric_limits<double>::infinity();
        report.argmax = *report.indefinite_at;
        for (std::size_t e = 0; e < ells.size(); ++e) {
            const auto it = std::max_element(scans[e].ratios.begin(), scans[e].ratios.end());
            const std::size_t i = static_cast<std::size_t>(it - scans[e].ratios.begin());
            report.per_ell.push_back(RatioSample{ells[e], grid[i], points[i].r, *it});
        }
        return report;
    }

    // Refine each ell's grid maximum by golden section inside its bracket.
    report.per_ell.resize(ells.size());
    parallel_for(ells.size(), [&](std::size_t e) {
        const std::vector<double>& rs = scans[e].ratios;
        const std::size_t i = static_cast<std::size_t>(std::max_element(rs.begin(), rs.end()) - rs.begin());
        RatioSample best{ells[e], grid[i], points[i].r, rs[i]};
        const auto neg = [&](double x) { return -point_ratio(kind, ells[e], point_at_rstar(x, g), params, tail).ratio; };
        if (i > 0 && i + 1 < grid.size()) {
            const Extremum ex = golden_section_minimum(neg, grid[i - 1], grid[i + 1]);
            if (-ex.value > best.ratio) best = RatioSample{ells[e], ex.location, r_of_rstar(ex.location, g), -ex.value};
        }
        report.per_ell[e] = best;
    });
    report.argmax = report.per_ell.front();
    for (const RatioSample& s : report.per_ell) {
        if (s.ratio > report.argmax.ratio) report.argmax = s;
        if (s.ell == 0) report.ell0_ratio = s.ratio;
    }
    report.constant = report.argmax.ratio;
    report.finite = std::isfinite(report.constant);

    // Post-hoc validation on random mode states.
    struct Sample {
        ModeState state;
        double r_star;
    };
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> pick_ell(cfg.ell_min, cfg.ell_max);
    const double log_lo = std::log(r_of_rstar(std::min(hi, kNearHorizonSplit * m), g));
    const double log_hi = std::log(r_of_rstar(hi, g));
    std::vector<Sample> samples(static_cast<std::size_t>(std::max(cfg.validation_samples, 0)));
    for (Sample& s : samples) {
        const double branch = unit(rng);
        const double w = unit(rng);
        if (branch < 1.0 / 3.0) {
            s.r_star = lo + (std::min(hi, kNearHorizonSplit * m) - lo) * w;
        } else if (branch < 2.0 / 3.0) {
            s.r_star = rstar_of_r(std::exp(log_lo + (log_hi - log_lo) * w), g);
        } else {
            const RatioSample& peak = report.per_ell[static_cast<std::size_t>(w * report.per_ell.size()) %
                                                     report.per_ell.size()];
            s.r_star = std::clamp(peak.r_star + normal(rng) * std::max(1.0, 0.01 * std::abs(peak.r_star)), lo, hi);
        }
        s.state = ModeState{pick_ell(rng), normal(rng), normal(rng), normal(rng)};
    }
    std::vector<double> violation(samples.size());
    const bool prop3 = kind == ConstantKind::prop3;
    parallel_for(samples.size(), [&](std::size_t i) {
        const RadialPoint p = point_at_rstar(samples[i].r_star, g);
        const SphereJet jet = mode_to_jet(samples[i].state, p);
        const double k = k_value(jet, p, params, prop3);
        const double c = controlled_sphere(jet, p, prop3);
        const double denom = report.constant * std::abs(k) + std::abs(c);
        violation[i] = denom > 0.0 ? (report.constant * k - c) / denom : 0.0;
    });
    report.validation_samples = samples.size();
    report.worst_violation = samples.empty() ? 0.0 : *std::min_element(violation.begin(), violation.end());
    return report;
}

}  // namespace morawetz

namespace morawetz {

std::vector<ProfileRow> profile_checks(const MultiplierParams& params, const Geometry& g, const VerifierConfig& cfg,
                                       int points) {
    const double m = g.mass();
    const double alpha = params.alpha;
    const double lo = cfg.rstar_min * m;
    const double hi = rstar_of_r(effective_r_max(cfg.r_max, params, g), g);
    const std::vector<double> foci = {0.0, params.x_offset - alpha, params.x_offset, params.x_offset + alpha};
    std::vector<ProfileRow> rows;
    for (const double rs : radial_grid(lo, hi, points, foci, m, 4)) {
        const RadialPoint p = point_at_rstar(rs, g);
        const double s2 = suffices2_lhs(p, params, g);
        rows.push_back({"suffices2", "r*", rs, s2, s2});
        const double hv = H_at(p, params, g);
        rows.push_back({"H", "r*", rs, hv, hv});
    }
    const std::vector<double> xfoci = {-alpha, 0.0, alpha};
    for (const double x : build_grid(-alpha, alpha, points, xfoci, 4)) {
        const double ratio = ratio_expression(x, alpha);
        rows.push_back({"ratio", "x", x, ratio, 0.9 - ratio});
        const RadialPoint p = point_at_rstar(x + params.x_offset, g);
        const double r2 = p.r * p.r;
        const double v = 2.0 * f_b(p, params).f * (p.r - 3.0 * m) / (r2 * r2) + big_F(p, params);
        rows.push_back({"midrange", "x", x, v, v});
    }
    return rows;
}

}  // namespace morawetz
