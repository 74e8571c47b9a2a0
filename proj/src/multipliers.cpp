#include "morawetz/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace morawetz {

double choose_cstar(double alpha, const Geometry& g) {
    if (!(alpha > 0.0)) throw std::invalid_argument("choose_cstar: alpha must be positive");
    const double m = g.mass();
    const double shift = alpha + std::sqrt(alpha);
    return 9.0 * alpha * alpha * m * m * m / (2.0 * (shift * shift + alpha * alpha));
}

MultiplierParams make_params(double alpha, const Geometry& g) {
    MultiplierParams params;
    params.alpha = alpha;
    params.c_star = choose_cstar(alpha, g);
    params.x_offset = alpha + std::sqrt(alpha);
    return params;
}

MultiplierEval power_multiplier(const RadialPoint& p, double coefficient, double power) noexcept {
    const double r = p.r;
    const double a = p.one_minus_mu;
    // d(1 - mu)/dr = mu/r and d^2(1 - mu)/dr^2 = -2 mu/r^2.
    const double a_r = p.mu / r;
    const double a_rr = -2.0 * p.mu / (r * r);

    const double g0 = coefficient * std::pow(r, power);
    const double g1 = power * g0 / r;
    const double g2 = (power - 1.0) * g1 / r;
    const double g3 = (power - 2.0) * g2 / r;

    MultiplierEval e;
    e.f = g0;
    e.f1 = a * g1;
    e.f2 = a * a_r * g1 + a * a * g2;
    e.f3 = a * (a_r * a_r + a * a_rr) * g1 + 3.0 * a * a * a_r * g2 + a * a * a * g3;
    return e;
}

MultiplierEval f_a(const RadialPoint& p, const MultiplierParams& params) noexcept {
    return power_multiplier(p, -params.c_star / (params.alpha * params.alpha), -2.0);
}

MultiplierEval f_b(const RadialPoint& p, const MultiplierParams& params) noexcept {
    const double al = params.alpha;
    const double x = x_of(p.r_star, params);
    const double x0 = -params.x_offset;
    const double d = al * al + x * x;

    MultiplierEval e;
    e.f = std::atan2(al * p.r_star, al * al + x * x0) / al;
    e.f1 = 1.0 / d;
    e.f2 = -2.0 * x / (d * d);
    e.f3 = (6.0 * x * x - 2.0 * al * al) / (d * d * d);
    return e;
}

double big_F(const RadialPoint& p, const MultiplierParams& params) noexcept {
    const double al = params.alpha;
    const double x = x_of(p.r_star, params);
    const double d = x * x + al * al;
    return (x - al) * (x + al) / (2.0 * p.one_minus_mu * d * d * d);
}

double big_F_composite(const RadialPoint& p, const MultiplierParams& params) noexcept {
    const double al = params.alpha;
    const double x = x_of(p.r_star, params);
    const double d = al * al + x * x;
    const MultiplierEval fb = f_b(p, params);
    return -0.25 / p.one_minus_mu *
           (fb.f3 + 4.0 * fb.f2 * x / d + 4.0 * al * al * fb.f1 / (d * d));
}

double H_of_r(double r, const MultiplierParams& params, const Geometry& g) {
    return H_at(point_at_r(r, g), params, g);
}

double dH_dr(double r, const MultiplierParams& params, const Geometry& g) {
    const double m = g.mass();
    const RadialPoint p = point_at_r(r, g);
    const MultiplierEval fb = f_b(p, params);
    return m * fb.f1 * (3.0 * r * r - 8.0 * m * r) / p.one_minus_mu +
           2.0 * m * fb.f * (3.0 * r - 4.0 * m) -
           2.0 * params.c_star / (params.alpha * params.alpha);
}

double d2H_dr2(double r, const MultiplierParams& params, const Geometry& g) {
    const double m = g.mass();
    const RadialPoint p = point_at_r(r, g);
    const MultiplierEval fb = f_b(p, params);
    const double a = p.one_minus_mu;
    const double q = 3.0 * r * r - 8.0 * m * r;
    return m * fb.f2 * q / (a * a) + 4.0 * m * fb.f1 * (3.0 * r - 4.0 * m) / a -
           2.0 * m * m * fb.f1 * q / (r * r * a * a) + 6.0 * m * fb.f;
}

double fb_lower_bound_constant(const MultiplierParams& params, const Geometry& g, double r_min,
                               double r_max, int points) {
    if (points < 2 || !(r_max > r_min)) {
        throw std::invalid_argument("fb_lower_bound_constant: bad grid");
    }
    const double al = params.alpha;
    double c = std::numeric_limits<double>::infinity();
    // Log-spaced in r: the bound switches behaviour at r = alpha.
    const double ratio = std::log(r_max / r_min);
    for (int i = 0; i < points; ++i) {
        const double r = r_min * std::exp(ratio * i / (points - 1));
        const double fb = f_b(point_at_r(r, g), params).f;
        c = std::min(c, al * fb / std::min(r / al, 1.0));
    }
    return c;
}

}  // namespace morawetz

namespace morawetz {

double H_at(const RadialPoint& p, const MultiplierParams& params, const Geometry& g) noexcept {
    const double m = g.mass();
    const double r = p.r;
    const double fb = f_b(p, params).f;
    return m * fb * (3.0 * r * r - 8.0 * m * r) -
           2.0 * params.c_star * (r - 3.0 * m) / (params.alpha * params.alpha);
}

double suffices2_lhs(const RadialPoint& p, const MultiplierParams& params, const Geometry& g) noexcept {
    const double m = g.mass();
    const double r = p.r;
    const double r2 = r * r;
    const double fb = f_b(p, params).f;
    return 2.0 * fb * (r - 3.0 * m) * r2 + H_at(p, params, g) + big_F(p, params) * r2 * r2 * r2;
}

}  // namespace morawetz
