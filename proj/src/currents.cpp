#include "morawetz/currents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace morawetz {

Moments& Moments::operator+=(const Moments& o) noexcept {
    m00 += o.m00;
    mrr += o.mrr;
    mtt += o.mtt;
    mang += o.mang;
    m0r += o.m0r;
    m0t += o.m0t;
    mrt += o.mrt;
    return *this;
}

Moments operator*(double s, Moments a) noexcept {
    a.m00 *= s;
    a.mrr *= s;
    a.mtt *= s;
    a.mang *= s;
    a.m0r *= s;
    a.m0t *= s;
    a.mrt *= s;
    return a;
}

SphereJet& SphereJet::operator+=(const SphereJet& o) noexcept {
    phi += o.phi;
    hess += o.hess;
    omega += o.omega;
    return *this;
}

SphereJet operator*(double s, SphereJet a) noexcept {
    a.phi = s * a.phi;
    a.hess *= s;
    a.omega = s * a.omega;
    return a;
}

double angular_coefficient(const RadialPoint& p) noexcept {
    return (1.0 - 1.5 * p.mu) / p.r;
}

namespace {

// h = f' + 2 (1-mu) f / r, the weight of the zeroth-order (Lagrangian) correction.
double lagrangian_weight(const MultiplierEval& f, const RadialPoint& p) noexcept {
    return f.f1 + 2.0 * p.one_minus_mu * f.f / p.r;
}

// dh/dr*, using d/dr* ((1-mu)/r) = (1-mu)(2 mu - 1)/r^2.
double lagrangian_weight_derivative(const MultiplierEval& f, const RadialPoint& p) noexcept {
    const double a = p.one_minus_mu;
    const double q = a / p.r;
    const double dq = a * (2.0 * p.mu - 1.0) / (p.r * p.r);
    return f.f2 + 2.0 * (q * f.f1 + dq * f.f);
}

double gradient_squared(const Moments& m, const RadialPoint& p) noexcept {
    return (m.mrr - m.mtt) / p.one_minus_mu + m.mang;
}

}  // namespace

double box_lagrangian(const MultiplierEval& f, const RadialPoint& p) noexcept {
    const double r = p.r;
    const double a = p.one_minus_mu;
    const double mu = p.mu;
    const double dmu = -(mu / r) * a;
    const double ddmu = a * mu * (2.0 - 3.0 * mu) / (r * r);
    return f.f3 / a + 4.0 / r * f.f2 - 4.0 * dmu / (r * a) * f.f1 +
           2.0 / (a * r) * (dmu * a / r - ddmu) * f.f;
}

double kv0_sphere(const Moments& m, const MultiplierEval& f, const RadialPoint& p) noexcept {
    const double r2 = p.r * p.r;
    const double a = p.one_minus_mu;
    const double h = lagrangian_weight(f, p);
    return r2 * (f.f1 / a * m.mrr + angular_coefficient(p) * f.f * m.mang -
                 0.5 * h * gradient_squared(m, p));
}

double kv1_sphere(const Moments& m, const MultiplierEval& f, const RadialPoint& p) noexcept {
    const double r2 = p.r * p.r;
    const double a = p.one_minus_mu;
    return r2 * (f.f1 / a * m.mrr + angular_coefficient(p) * f.f * m.mang -
                 0.25 * box_lagrangian(f, p) * m.m00);
}

namespace {

struct Kv2Terms {
    double completed_square;
    double angular;
    double f_term;
    double zeroth_order;
};

Kv2Terms kv2_terms(const Moments& m, const MultiplierEval& f, const RadialPoint& p,
                   const MultiplierParams& params) noexcept {
    const double r = p.r;
    const double r2 = r * r;
    const double a = p.one_minus_mu;
    const double mu = p.mu;
    const double al = params.alpha;
    const double x = x_of(p.r_star, params);
    const double d = al * al + x * x;
    const double b = beta(p, params);

    Kv2Terms t{};
    t.completed_square = r2 * f.f1 / a * (m.mrr + 2.0 * b * m.m0r + b * b * m.m00);
    t.angular = r2 * angular_coefficient(p) * f.f * m.mang;
    t.f_term = -r2 * 0.25 / a * (f.f3 + 4.0 * f.f2 * x / d + 4.0 * al * al * f.f1 / (d * d)) * m.m00;
    t.zeroth_order = -r2 * mu * f.f / (2.0 * r * r2) * (4.0 * mu - 3.0) * m.m00;
    return t;
}

}  // namespace

double kv2_sphere(const Moments& m, const MultiplierEval& f, const RadialPoint& p,
                  const MultiplierParams& params) noexcept {
    const Kv2Terms t = kv2_terms(m, f, p, params);
    return t.completed_square + t.angular + t.f_term + t.zeroth_order;
}

CombinedDivergence k_combined_sphere(const SphereJet& jet, const RadialPoint& p,
                                     const MultiplierParams& params) noexcept {
    const double r2 = p.r * p.r;
    const double a = p.one_minus_mu;
    const MultiplierEval fa = f_a(p, params);
    const MultiplierEval fb = f_b(p, params);
    const Kv2Terms t = kv2_terms(jet.omega, fb, p, params);

    CombinedDivergence out;
    DivergenceBreakdown& parts = out.parts;
    parts.rr_square = r2 * fa.f1 / a * jet.phi.mrr;
    parts.angular = r2 * angular_coefficient(p) * fa.f * jet.phi.mang + t.angular;
    parts.lagrangian = -0.5 * r2 * lagrangian_weight(fa, p) * gradient_squared(jet.phi, p);
    parts.completed_square = t.completed_square;
    parts.f_term = t.f_term;
    parts.zeroth_order = t.zeroth_order;
    parts.total = parts.sum_of_parts();
    out.total = parts.total;
    return out;
}

double lower_bound_sphere(const SphereJet& jet, const RadialPoint& p,
                          const MultiplierParams& params) noexcept {
    const double r = p.r;
    const double r2 = r * r;
    const double r4 = r2 * r2;
    const double mu = p.mu;
    const double rm3 = angular_coefficient(p) * r2;  // r - 3M
    const double fb = f_b(p, params).f;
    const double F = big_F(p, params);
    const double al2 = params.alpha * params.alpha;

    const double omega_coeff = 2.0 * fb * rm3 / r4 + fb * mu * (3.0 - 4.0 * mu) / (2.0 * r * r2) + F;
    const double phi_coeff = -2.0 * params.c_star * rm3 / (al2 * r4);
    return r2 * (omega_coeff * jet.omega.m00 + phi_coeff * jet.phi.mang);
}

double k_aux_sphere(const SphereJet& jet, const RadialPoint& p) noexcept {
    return kv0_sphere(jet.phi, power_multiplier(p, 1.0, -3.0), p);
}

double k_aux_dt_coefficient(const RadialPoint& p) noexcept {
    const MultiplierEval f = power_multiplier(p, 1.0, -3.0);
    return 0.5 * lagrangian_weight(f, p) / p.one_minus_mu;
}

double controlled_sphere(const SphereJet& jet, const RadialPoint& p, bool include_time_derivative) noexcept {
    const double r = p.r;
    const double r2 = r * r;
    const double rm3 = angular_coefficient(p) * r2;
    const double w = std::abs(p.r_star) + 1.0;
    double density = jet.phi.mrr / (r * r2) + rm3 * rm3 / r * jet.hess +
                     r * r2 / (p.one_minus_mu * w * w * w * w) * jet.phi.mang;
    if (include_time_derivative) density += jet.phi.mtt / (r2 * r2);
    return r2 * density;
}

FluxComponents flux_v0(const Moments& m, const MultiplierEval& f, const RadialPoint& p) noexcept {
    const double r2 = p.r * p.r;
    FluxComponents c;
    c.time = r2 * f.f * m.mrt;
    c.rstar = r2 * f.f * (0.5 * (m.mrr + m.mtt) - 0.5 * p.one_minus_mu * m.mang);
    return c;
}

FluxComponents flux_v1(const Moments& m, const MultiplierEval& f, const RadialPoint& p) noexcept {
    const double r2 = p.r * p.r;
    const double h = lagrangian_weight(f, p);
    const double dh = lagrangian_weight_derivative(f, p);
    FluxComponents c = flux_v0(m, f, p);
    c.time += r2 * 0.5 * h * m.m0t;
    c.rstar += r2 * (0.5 * h * m.m0r - 0.25 * dh * m.m00);
    return c;
}

FluxComponents flux_v2(const Moments& m, const MultiplierEval& f, const RadialPoint& p,
                       const MultiplierParams& params) noexcept {
    FluxComponents c = flux_v1(m, f, p);
    c.rstar += p.r * p.r * f.f1 * beta(p, params) * m.m00;
    return c;
}

FluxComponents flux_t(const Moments& m, const RadialPoint& p) noexcept {
    const double r2 = p.r * p.r;
    FluxComponents c;
    c.time = r2 * 0.5 * (m.mtt + m.mrr + p.one_minus_mu * m.mang);
    c.rstar = r2 * m.mrt;
    return c;
}

FluxComponents flux_components(const SphereJet& jet, const RadialPoint& p,
                               const MultiplierParams& params, CurrentKind which) noexcept {
    switch (which) {
        case CurrentKind::J: {
            const FluxComponents a = flux_v0(jet.phi, f_a(p, params), p);
            const FluxComponents b = flux_v2(jet.omega, f_b(p, params), p, params);
            return {a.time + b.time, a.rstar + b.rstar};
        }
        case CurrentKind::J_aux:
            return flux_v0(jet.phi, power_multiplier(p, 1.0, -3.0), p);
        case CurrentKind::J_T: {
            const FluxComponents a = flux_t(jet.phi, p);
            const FluxComponents b = flux_t(jet.omega, p);
            return {a.time + b.time, a.rstar + b.rstar};
        }
    }
    return {};
}

SphereJet mode_to_jet(const ModeState& m, const RadialPoint& p) {
    if (m.ell < 0) throw std::invalid_argument("mode_to_jet: ell must be nonnegative");
    const double lambda = static_cast<double>(m.ell) * (m.ell + 1);
    const double r2 = p.r * p.r;

    SphereJet jet;
    jet.phi.m00 = m.u * m.u;
    jet.phi.mrr = m.ur * m.ur;
    jet.phi.mtt = m.ut * m.ut;
    jet.phi.mang = lambda * m.u * m.u / r2;
    jet.phi.m0r = m.u * m.ur;
    jet.phi.m0t = m.u * m.ut;
    jet.phi.mrt = m.ur * m.ut;
    jet.hess = lambda * (lambda - 1.0) * m.u * m.u / (r2 * r2);
    if (m.ell == 0) jet.hess = 0.0;

    jet.omega = lambda * jet.phi;
    jet.omega.mang = lambda * lambda * m.u * m.u / r2;
    return jet;
}

namespace {

bool cauchy_schwarz(double cross, double a, double b, double tol) noexcept {
    return cross * cross <= a * b * (1.0 + tol) + std::numeric_limits<double>::min();
}

bool moments_valid(const Moments& m, double tol) {
    const double scale = std::abs(m.m00) + std::abs(m.mrr) + std::abs(m.mtt) + std::abs(m.mang);
    const double floor = -tol * scale;
    if (m.m00 < floor || m.mrr < floor || m.mtt < floor || m.mang < floor) return false;
    return cauchy_schwarz(m.m0r, m.m00, m.mrr, tol) && cauchy_schwarz(m.m0t, m.m00, m.mtt, tol) &&
           cauchy_schwarz(m.mrt, m.mrr, m.mtt, tol);
}

}  // namespace

bool satisfies_jet_invariants(const SphereJet& jet, const RadialPoint& p, double rel_tol) noexcept {
    if (!moments_valid(jet.phi, rel_tol) || !moments_valid(jet.omega, rel_tol)) return false;
    if (jet.hess < -rel_tol * std::abs(jet.hess)) return false;
    const double r2 = p.r * p.r;
    const double lhs = jet.omega.m00;
    const double rhs = r2 * jet.phi.mang;
    if (std::abs(lhs - rhs) > rel_tol * std::max({std::abs(lhs), std::abs(rhs), 1e-300})) return false;
    return 2.0 * jet.omega.m00 <= r2 * jet.omega.mang * (1.0 + rel_tol) + std::numeric_limits<double>::min();
}

}  // namespace morawetz
