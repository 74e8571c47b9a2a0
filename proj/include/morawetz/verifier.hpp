#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "morawetz/currents.hpp"
#include "morawetz/geometry.hpp"
#include "morawetz/multipliers.hpp"

namespace morawetz {

/// Grid parameters shared by every check. Radii are in units of M.
struct VerifierConfig {
    double rstar_min = -200.0;
    double r_max = 1.0e4;          ///< R_max; raised to 20 alpha when that is larger
    double split_radius = 10.0;    ///< R in the H chain
    int grid_points = 4000;
    int refinements = 1;           ///< extra 2x refinements after the base grid
    double stability_tolerance = 0.01;
    double identity_tolerance = 1e-12;
    int focus_levels = 30;
};

/// `margin` records decide the verdict; `report` records carry diagnostics.
enum class RecordKind { margin, report };

struct CheckRecord {
    std::string name;
    std::string description;
    std::string coordinate;  ///< "r*", "r", "x" or "-" for point checks
    RecordKind kind = RecordKind::margin;
    double lo = 0.0;
    double hi = 0.0;
    int grid_points = 0;
    int refinement_levels = 0;
    std::vector<double> trace;  ///< margin (or reported value) per refinement level
    double min_margin = 0.0;    ///< for reports: the reported value
    double argmin = 0.0;
    bool stable = true;
    bool passed = false;
};

struct CheckResult {
    std::string name;
    std::vector<CheckRecord> records;
    bool passed = false;
};

struct CertificationReport {
    double mass = 1.0;
    double alpha = 0.0;
    double c_star = 0.0;
    std::vector<CheckResult> checks;
    bool verdict = false;

    /// Smallest margin over all margin records (may be negative).
    double worst_margin() const noexcept;
};

/// 2 f^b (r-3M) r^2 + H(r) + F r^6 >= 0 on (2M, R_max].
CheckResult check_suffices2(const MultiplierParams& params, const Geometry& g, const VerifierConfig& cfg);

/// H > 0 on (2M, 8M/3]; H and dH/dr vanish at 3M; d^2H/dr^2 >= c alpha^-2 on
/// [8M/3, R]; H > 0 on [R, R_max], together with the intermediate bounds.
CheckResult check_H(const MultiplierParams& params, const Geometry& g, const VerifierConfig& cfg);

/// (alpha - x)(x + alpha + alpha^{1/2})^3 / (4 (x^2 + alpha^2)^2) < 9/10 on
/// [-alpha, alpha], with the 3/4 and (2/7) 2^{3/2} sub-bounds and the cube bounds.
CheckResult check_ratio(const MultiplierParams& params, const VerifierConfig& cfg);

/// 2 f^b (r-3M)/r^4 + F >= 0 on x in [-alpha, alpha], plus deviations of the
/// large-alpha approximations.
CheckResult check_midrange_approx(const MultiplierParams& params, const Geometry& g,
                                  const VerifierConfig& cfg);

/// Runs all four checks at one alpha.
CertificationReport certify(double alpha, const Geometry& g, const VerifierConfig& cfg);

struct AlphaScanConfig {
    double alpha_min = 10.0;
    double alpha_max = 1.0e5;
    int per_decade = 8;
};

struct AlphaScanResult {
    std::vector<CertificationReport> reports;  ///< one per sampled alpha, ascending
    std::optional<std::size_t> certified;      ///< index of the smallest passing alpha
};

/// Log-spaced scan. Stops at the first passing alpha unless `exhaustive`.
AlphaScanResult scan_alpha(const AlphaScanConfig& scan, const Geometry& g, const VerifierConfig& cfg,
                           bool exhaustive = false);

enum class ConstantKind { prop2, prop3 };

struct ConstantsConfig {
    int ell_min = 0;
    int ell_max = 64;
    bool include_limit = true;
    double rstar_min = -200.0;
    double r_max = 1.0e4;  ///< raised to 20 alpha when that is larger
    int grid_points = 2000;
    int validation_samples = 100000;
    std::uint64_t seed = 12345;
    int focus_levels = 30;
};

struct RatioSample {
    int ell = 0;  ///< -1 marks the large-ell limit form
    double r_star = 0.0;
    double r = 0.0;
    double ratio = 0.0;
};

/// Thrown by best_constant(prop2) when the K form fails to be positive semidefinite.
class NotSemidefiniteError : public std::runtime_error {
public:
    NotSemidefiniteError(const std::string& what, RatioSample where)
        : std::runtime_error(what), where_(where) {}
    const RatioSample& where() const noexcept { return where_; }

private:
    RatioSample where_;
};

struct BestConstantReport {
    ConstantKind kind = ConstantKind::prop2;
    double alpha = 0.0;
    double c_star = 0.0;
    bool finite = false;
    double constant = 0.0;
    RatioSample argmax;
    std::vector<RatioSample> per_ell;  ///< maximizing r* for every ell (and the limit form)
    double ell0_ratio = 0.0;           ///< max ratio over r* at ell = 0
    double ell0_expected = 0.0;        ///< alpha^2 / (2 C_*) for prop2, 0 otherwise
    std::string grid;
    std::string diagnostic;
    std::optional<RatioSample> indefinite_at;
    std::size_t validation_samples = 0;
    double worst_violation = 0.0;  ///< min over samples of (C K - controlled)/(C|K| + controlled)
};

/// Largest generalized eigenvalue of (A, B) for symmetric 3x3 forms: the
/// smallest C with C B - A >= 0. `indefinite` when B has a negative direction,
/// `unbounded` when A is positive on the null space of B.
struct FormRatio {
    double ratio = 0.0;
    bool indefinite = false;
    bool unbounded = false;
};
FormRatio generalized_ratio(const double (&a)[3][3], const double (&b)[3][3]);

/// The quadratic forms in (u, d_{r*}u, d_t u) for one mode at one radius.
void controlled_form(int ell, const RadialPoint& p, bool include_time_derivative, double (&out)[3][3]);
void k_form(int ell, const RadialPoint& p, const MultiplierParams& params, bool with_aux, double (&out)[3][3]);

/// Large-ell tail at one radius. Both forms are A_0 + lambda A_1 + lambda^2 A_2 in
/// lambda = l(l+1); the ratio of the pencils divided by lambda is maximized over
/// real lambda from lambda_min to 1e12 on a log grid (quarter decades).
FormRatio limit_ratio(ConstantKind kind, const RadialPoint& p, const MultiplierParams& params, double lambda_min);

/// Ratio controlled / K (prop2) or controlled / (K + K^aux) (prop3) at one point;
/// ell = -1 selects the large-ell limit.
FormRatio point_ratio(ConstantKind kind, int ell, const RadialPoint& p, const MultiplierParams& params,
                      double limit_lambda_min = 4290.0);

BestConstantReport best_constant(ConstantKind kind, const MultiplierParams& params, const Geometry& g,
                                 const ConstantsConfig& cfg);

/// Plot data: (check, coordinate, location, value, margin) along the main margin
/// functions of the four checks, `points` samples each.
struct ProfileRow {
    std::string check;
    std::string coordinate;
    double location = 0.0;
    double value = 0.0;
    double margin = 0.0;
};
std::vector<ProfileRow> profile_checks(const MultiplierParams& params, const Geometry& g, const VerifierConfig& cfg,
                                       int points);

/// r* sample grid shared by the checks: uniform near the hole, log-spaced in r
/// beyond r* = 60 M, with geometric refinement around each focus.
std::vector<double> radial_grid(double rstar_lo, double rstar_hi, int points, std::span<const double> foci,
                                double mass, int focus_levels = 30);

}  // namespace morawetz
