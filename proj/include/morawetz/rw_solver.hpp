#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "morawetz/currents.hpp"
#include "morawetz/geometry.hpp"
#include "morawetz/multipliers.hpp"

namespace morawetz {

/// V_l = (1 - 2M/r)(l(l+1)/r^2 + 2M/r^3). Throws std::domain_error for r <= 2M.
double rw_potential(int ell, double r, const Geometry& g);

/// Smooth compactly supported pulse A exp(1 - 1/(1 - s^2)), s = (r* - center)/width,
/// moving with d_t u = -velocity d_{r*} u at t = t_start.
struct BumpData {
    double center = 0.0;
    double width = 1.0;
    double amplitude = 1.0;
    double velocity = 0.0;

    double value(double r_star) const noexcept;
    double derivative(double r_star) const noexcept;
};

/// Evolution of one mode of the Regge-Wheeler equation
///
///     d_t^2 u - d_{r*}^2 u + V_l u = 0,   phi = r^{-1} u Y_l,
///
/// on the uniform grid r*_i = rstar_min + i h, i = 0..n, with u = 0 held at both
/// ends. mass = 0 selects flat space (V = 0, requires ell = 0).
struct EvolutionConfig {
    double mass = 1.0;
    int ell = 0;
    double rstar_min = -100.0;
    double rstar_max = 100.0;
    double h = 0.1;
    double courant = 0.5;  ///< k / h
    double t_start = 0.0;
    double t_final = 10.0;
    std::function<double(double)> u0;
    std::function<double(double)> ut0;
    std::string boundary = "dirichlet";
    /// Window of r* kept in the history (clipped to the domain).
    double record_min = -std::numeric_limits<double>::infinity();
    double record_max = std::numeric_limits<double>::infinity();

    double k() const noexcept { return courant * h; }
    /// Throws std::invalid_argument when an invariant fails.
    void validate() const;
};

/// Thrown when the discrete energy grows beyond 100x its initial value (norm beyond 10x)
/// or stops being finite.
class InstabilityError : public std::runtime_error {
public:
    InstabilityError(const std::string& what, double time, double energy_ratio)
        : std::runtime_error(what), time_(time), energy_ratio_(energy_ratio) {}
    double time() const noexcept { return time_; }
    double energy_ratio() const noexcept { return energy_ratio_; }

private:
    double time_;
    double energy_ratio_;
};

/// Recorded solution. u, ut and ur are [level][index] over the recording window;
/// ut is the centred time difference and ur the centred space difference.
struct FieldHistory {
    double mass = 1.0;
    int ell = 0;
    double h = 0.0;
    double k = 0.0;
    double rstar0 = 0.0;  ///< r* of window index 0
    std::size_t points = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> u;
    std::vector<std::vector<double>> ut;
    std::vector<std::vector<double>> ur;
    /// Conserved discrete energy of the full grid at t_{n+1/2}:
    /// (1/2) sum h [((u^{n+1} - u^n)/k)^2 + (D u^{n+1})(D u^n) + V u^{n+1} u^n].
    std::vector<double> energy;
    std::vector<double> energy_times;

    double rstar_at(std::size_t i) const noexcept { return rstar0 + h * static_cast<double>(i); }
    std::size_t levels() const noexcept { return times.size(); }
    /// Array lengths agree and every value is finite.
    bool consistent() const noexcept;
    /// max |E - E_0| / E_0 over the run (0 for zero data).
    double energy_drift() const noexcept;
};

/// Second-order leapfrog with a third-order Taylor start. Deterministic.
FieldHistory evolve(const EvolutionConfig& cfg);

/// Mode state of phi at one history sample: u_phi = u/r, d_{r*} u_phi = u_r/r - (1-mu) u/r^2.
ModeState mode_state_at(const FieldHistory& hist, std::size_t level, std::size_t index, const RadialPoint& p);

/// Jets for every recorded (level, index). Requires mass > 0.
std::vector<std::vector<SphereJet>> assemble_jets(const FieldHistory& hist);

/// {t1 <= t <= t2, r1* - (t2 - t) <= r* <= r2* + (t2 - t)}.
struct TrapezoidRegion {
    double t1 = 0.0;
    double t2 = 1.0;
    double r1 = -1.0;
    double r2 = 1.0;

    double left(double t) const noexcept { return r1 - (t2 - t); }
    double right(double t) const noexcept { return r2 + (t2 - t); }
    void validate() const;
};

enum class Density { K, K_aux, K_plus_aux, controlled, controlled_spatial, lower_bound };

/// Integral over the region of (1-mu) times the sphere-integrated density, in
/// dt dr*; trapezoid rule in both directions with cubic interpolation at the
/// slanted edges. Region times must fall on recorded levels.
double bulk_integral(const FieldHistory& hist, const TrapezoidRegion& region, Density density,
                     const MultiplierParams& params);

struct BoundaryFlux {
    double past = 0.0;    ///< energy-type integral of `time` over the t1 slice
    double future = 0.0;  ///< same over the t2 slice
    double left = 0.0;    ///< integral of time + rstar along r* = r1* - (t2 - t)
    double right = 0.0;   ///< integral of time - rstar along r* = r2* + (t2 - t)
    /// past - future - left - right, equal to the bulk integral of the matching divergence.
    double net() const noexcept { return past - future - left - right; }
};

BoundaryFlux boundary_flux(const FieldHistory& hist, const TrapezoidRegion& region, CurrentKind which,
                           const MultiplierParams& params);

/// Smallest sphere-integrated K over the recorded nodes inside the region,
/// divided by the largest |K| there (0 for a zero field).
double min_relative_k(const FieldHistory& hist, const TrapezoidRegion& region, const MultiplierParams& params);

struct EnsembleConfig {
    double mass = 1.0;
    int runs = 24;
    int ell_max = 8;
    std::uint64_t seed = 20240601;
    double h = 0.1;
    double courant = 0.5;
    TrapezoidRegion region{0.0, 30.0, -10.0, 10.0};
    double padding = 10.0;
    double center_spread = 20.0;  ///< bump centres in [-spread, spread] about the region middle
    double width_min = 2.0;
    double width_max = 6.0;
    double time_shift = 7.5;
    bool refine = true;
    bool shift = true;
};

struct RunRecord {
    int ell = 0;
    BumpData bump;
    double data_norm = 0.0;  ///< T-energy of phi and the Omega_i phi on the past slice
    double bulk_controlled = 0.0;
    double ratio = 0.0;
    double ratio_fine = 0.0;
    double ratio_shifted = 0.0;
    double bulk_k = 0.0;
    double bulk_k_plus_aux = 0.0;
    double integrated_prop3_ratio = 0.0;  ///< bulk(controlled) / bulk(K + K^aux)
    double min_relative_k = 0.0;
    double energy_drift = 0.0;
    double max_phi = 0.0;  ///< max |u|/r over the record window
    double local_energy_start = 0.0;
    double local_energy_end = 0.0;
};

struct Theorem1Record {
    double alpha = 0.0;
    double c_star = 0.0;
    TrapezoidRegion region;
    std::vector<RunRecord> runs;
    double empirical_c = 0.0;
    double empirical_c_fine = 0.0;
    double empirical_c_shifted = 0.0;
    double refinement_change = 0.0;  ///< |C_fine / C - 1|
    double shift_change = 0.0;       ///< |C_shifted / C - 1|
    double max_prop3_ratio = 0.0;
    double worst_relative_k = 0.0;
    double max_energy_drift = 0.0;
    bool finite = false;
    bool stable = false;
    bool shift_invariant = false;
};

/// Padded r* domain so the boundaries stay outside the causal past of the region
/// back to t_start.
std::pair<double, double> padded_domain(const TrapezoidRegion& region, double t_start, double padding);

/// Random-data ensemble over ell in [0, ell_max]. Runs are independent and
/// evaluated through parallel_for; results are stored per run in seed order.
Theorem1Record theorem1_check(const EnsembleConfig& cfg, const MultiplierParams& params);

/// Bulk-versus-flux defects for K / J, K^aux / J^aux and the energy current
/// on one region, repeated with h halved `levels - 1` times.
struct DivergenceRow {
    double h = 0.0;
    double bulk_k = 0.0;
    double flux_j = 0.0;
    double bulk_aux = 0.0;
    double flux_aux = 0.0;
    double flux_t = 0.0;  ///< net flux of the energy current (its divergence vanishes)
    double energy_drift = 0.0;

    double defect_j() const noexcept { return bulk_k - flux_j; }
    double defect_aux() const noexcept { return bulk_aux - flux_aux; }
};

struct DivergenceStudy {
    std::vector<DivergenceRow> rows;
    /// defect(h) / defect(h/2) for consecutive rows.
    std::vector<double> ratio_j;
    std::vector<double> ratio_aux;
    std::vector<double> ratio_t;
};

DivergenceStudy divergence_study(const EvolutionConfig& base, const TrapezoidRegion& region,
                                 const MultiplierParams& params, int levels);

/// Flat-space (V = 0) right-moving pulse against the exact translate u0(r* - t).
struct FlatRow {
    double h = 0.0;
    double l2_error = 0.0;
};

struct FlatStudy {
    std::vector<FlatRow> rows;
    std::vector<double> orders;  ///< log2 of consecutive error ratios
};

FlatStudy flat_space_study(const BumpData& pulse, double rstar_min, double rstar_max, double duration, double h,
                           int levels, double courant = 0.5);

}  // namespace morawetz
