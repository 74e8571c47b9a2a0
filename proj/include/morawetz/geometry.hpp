#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace morawetz {

/// Exterior Schwarzschild background of mass M (geometric units).
class Geometry {
public:
    explicit Geometry(double mass);

    double mass() const noexcept { return mass_; }

private:
    double mass_;
};

/// A radial location with both coordinates and the lapse-like factor 1 - 2M/r.
///
/// `one_minus_mu` is computed from r - 2M directly rather than as 1 - mu, so it
/// keeps full relative accuracy down to r* of several hundred M below zero.
struct RadialPoint {
    double r = 0.0;
    double r_star = 0.0;
    double mu = 0.0;
    double one_minus_mu = 0.0;
};

/// Multiplier constants: alpha, the matching C_*, and the shift alpha + sqrt(alpha)
/// that defines x = r* - alpha - sqrt(alpha).
struct MultiplierParams {
    double alpha = 0.0;
    double c_star = 0.0;
    double x_offset = 0.0;
};

/// Thrown when the tortoise inversion does not reach tolerance.
class InversionError : public std::runtime_error {
public:
    InversionError(const std::string& what, std::vector<double> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}

    /// Iterates of the log-radius variable s = ln((r - 2M)/M).
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

/// r* = r + 2M ln(r - 2M) - 3M - 2M ln M, so that r*(3M) = 0.
/// Throws std::domain_error for r <= 2M.
double rstar_of_r(double r, const Geometry& g);

/// Inverse of rstar_of_r; any finite r* maps to a unique r > 2M.
double r_of_rstar(double r_star, const Geometry& g);

RadialPoint point_at_r(double r, const Geometry& g);
RadialPoint point_at_rstar(double r_star, const Geometry& g);

inline double x_of(double r_star, const MultiplierParams& params) noexcept {
    return r_star - params.x_offset;
}

/// beta = (1 - mu)/r - x/(alpha^2 + x^2)
double beta(const RadialPoint& p, const MultiplierParams& params) noexcept;

}  // namespace morawetz
