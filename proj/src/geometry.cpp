#include "morawetz/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace morawetz {

namespace {

constexpr int kMaxNewtonSteps = 100;
constexpr double kRelativeTolerance = 1e-12;

// In s = ln((r - 2M)/M) the tortoise coordinate reads r* = M e^s + 2 M s - M,
// a convex increasing function of s on the whole real line.
double residual(double s, double r_star, double m) {
    return m * std::exp(s) + 2.0 * m * s - m - r_star;
}

double seed(double r_star, double m) {
    if (r_star < 0.0) return (r_star + m) / (2.0 * m);
    return std::log(std::max(r_star, m) / m);
}

double solve_log_radius(double r_star, double m) {
    if (!std::isfinite(r_star)) {
        throw std::domain_error("r_of_rstar: r* must be finite");
    }
    std::vector<double> trace;

    double s = seed(r_star, m);
    double lo = s;
    double hi = s;
    double step = 1.0;
    while (residual(lo, r_star, m) > 0.0) {
        lo -= step;
        step *= 2.0;
    }
    step = 1.0;
    while (residual(hi, r_star, m) < 0.0) {
        hi += step;
        step *= 2.0;
    }

    for (int it = 0; it < kMaxNewtonSteps; ++it) {
        trace.push_back(s);
        const double g = residual(s, r_star, m);
        if (g == 0.0) return s;
        if (g < 0.0) lo = std::max(lo, s);
        else hi = std::min(hi, s);

        const double dg = m * std::exp(s) + 2.0 * m;
        const double newton = g / dg;
        // a Newton step at rounding level means the residual is noise
        if (std::abs(newton) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(s))) {
            return s - newton;
        }
        double next = s - newton;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);

        const double ds = next - s;
        s = next;
        // dr/r = (1 - mu) ds, and 1 - mu <= 1.
        if (std::abs(ds) <= 0.25 * kRelativeTolerance * std::max(1.0, std::abs(s)) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(s))) {
            return s;
        }
    }
    trace.push_back(s);
    throw InversionError("r_of_rstar: no convergence for r* = " + std::to_string(r_star),
                         std::move(trace));
}

}  // namespace

Geometry::Geometry(double mass) : mass_(mass) {
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw std::invalid_argument("Geometry: mass must be positive and finite");
    }
}

double rstar_of_r(double r, const Geometry& g) {
    const double m = g.mass();
    if (!(r > 2.0 * m)) {
        throw std::domain_error("rstar_of_r: r must exceed 2M");
    }
    return r + 2.0 * m * std::log((r - 2.0 * m) / m) - 3.0 * m;
}

double r_of_rstar(double r_star, const Geometry& g) {
    return point_at_rstar(r_star, g).r;
}

RadialPoint point_at_r(double r, const Geometry& g) {
    const double m = g.mass();
    RadialPoint p;
    p.r_star = rstar_of_r(r, g);
    p.r = r;
    p.mu = 2.0 * m / r;
    p.one_minus_mu = (r - 2.0 * m) / r;
    return p;
}

RadialPoint point_at_rstar(double r_star, const Geometry& g) {
    const double m = g.mass();
    const double s = solve_log_radius(r_star, m);
    const double excess = m * std::exp(s);
    RadialPoint p;
    p.r_star = r_star;
    p.r = 2.0 * m + excess;
    p.mu = 2.0 * m / p.r;
    p.one_minus_mu = excess / p.r;
    return p;
}

double beta(const RadialPoint& p, const MultiplierParams& params) noexcept {
    const double x = x_of(p.r_star, params);
    return p.one_minus_mu / p.r - x / (params.alpha * params.alpha + x * x);
}

}  // namespace morawetz
