#pragma once

#include "morawetz/geometry.hpp"

namespace morawetz {

/// A radial multiplier f(r*) together with its first three r*-derivatives.
struct MultiplierEval {
    double f = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
};

/// C_* = 9 alpha^2 M^3 / (2 ((alpha + sqrt(alpha))^2 + alpha^2)), the value that
/// makes dH/dr vanish at the photon sphere.
double choose_cstar(double alpha, const Geometry& g);

/// alpha together with its C_* and x-offset. Throws for alpha <= 0.
MultiplierParams make_params(double alpha, const Geometry& g);

/// c r^power with derivatives taken along r* (dr/dr* = 1 - mu).
MultiplierEval power_multiplier(const RadialPoint& p, double coefficient, double power) noexcept;

/// f^a = -C_* / (alpha^2 r^2).
MultiplierEval f_a(const RadialPoint& p, const MultiplierParams& params) noexcept;

/// f^b = (1/alpha)(atan(x/alpha) - atan(-1 - alpha^{-1/2})), with
/// (f^b)' = 1/(alpha^2 + x^2) and the next two derivatives in closed form.
///
/// The arctangent difference is evaluated as a single atan2 of
/// (alpha r*, alpha^2 + x x_0), so f^b is exactly zero at r* = 0 and keeps
/// relative accuracy around the photon sphere.
MultiplierEval f_b(const RadialPoint& p, const MultiplierParams& params) noexcept;

/// F = (x^2 - alpha^2) / (2 (1 - mu) (x^2 + alpha^2)^3).
double big_F(const RadialPoint& p, const MultiplierParams& params) noexcept;

/// The unreduced expression
/// -(1/4)(1/(1-mu)) [ (f^b)''' + 4 (f^b)'' x/(alpha^2+x^2) + 4 alpha^2 (f^b)'/(alpha^2+x^2)^2 ].
double big_F_composite(const RadialPoint& p, const MultiplierParams& params) noexcept;

/// H(r) = f^b mu (3 - 4 mu) r^3 / 2 - 2 C_* (r - 3M)/alpha^2, written as
/// M f^b (3r^2 - 8Mr) - 2 C_* (r - 3M)/alpha^2. Derivatives are in r.
double H_of_r(double r, const MultiplierParams& params, const Geometry& g);
double dH_dr(double r, const MultiplierParams& params, const Geometry& g);
double d2H_dr2(double r, const MultiplierParams& params, const Geometry& g);

/// Largest c with f^b >= (c/alpha) min{r/alpha, 1} on a grid over [r_min, r_max].
double fb_lower_bound_constant(const MultiplierParams& params, const Geometry& g, double r_min,
                               double r_max, int points);

}  // namespace morawetz

namespace morawetz {

/// H evaluated at an already-resolved radial point (avoids re-inverting r*).
double H_at(const RadialPoint& p, const MultiplierParams& params, const Geometry& g) noexcept;

/// Left side of the reduced nonnegativity inequality,
/// 2 f^b (r - 3M) r^2 + H(r) + F r^6.
double suffices2_lhs(const RadialPoint& p, const MultiplierParams& params, const Geometry& g) noexcept;

}  // namespace morawetz
