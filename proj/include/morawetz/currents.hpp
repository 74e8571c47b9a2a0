#pragma once

#include "morawetz/geometry.hpp"
#include "morawetz/multipliers.hpp"

namespace morawetz {

/// Sphere integrals (unit-sphere measure dA, at fixed t and r*) of the
/// quadratic quantities built from one field psi and its first derivatives.
///
///   m00 = int psi^2          mrr = int (d_{r*} psi)^2    mtt = int (d_t psi)^2
///   mang = int |angular gradient of psi|^2 on the sphere of radius r
///   m0r = int psi d_{r*} psi m0t = int psi d_t psi       mrt = int d_{r*} psi d_t psi
///
/// The divergences only read m00, mrr, mtt, mang and m0r; the t-mixed entries
/// feed the flux components.
struct Moments {
    double m00 = 0.0;
    double mrr = 0.0;
    double mtt = 0.0;
    double mang = 0.0;
    double m0r = 0.0;
    double m0t = 0.0;
    double mrt = 0.0;

    Moments& operator+=(const Moments& o) noexcept;
    friend Moments operator+(Moments a, const Moments& b) noexcept { return a += b; }
    friend Moments operator*(double s, Moments a) noexcept;
};

/// Everything the currents need from the 2-jet of phi on one sphere.
///
/// `omega` holds the moments of Omega_i phi summed over the three rotation
/// generators; `hess` is int |angular Hessian of phi|^2.
struct SphereJet {
    Moments phi;
    double hess = 0.0;
    Moments omega;

    SphereJet& operator+=(const SphereJet& o) noexcept;
    friend SphereJet operator+(SphereJet a, const SphereJet& b) noexcept { return a += b; }
    friend SphereJet operator*(double s, SphereJet a) noexcept;
};

/// One spherical-harmonic mode phi = u(t, r*) Y_l of the solution, with Y_l
/// unit-normalized on the sphere.
struct ModeState {
    int ell = 0;
    double u = 0.0;
    double ur = 0.0;
    double ut = 0.0;
};

/// Term-by-term split of the combined divergence (all sphere-integrated with r^2).
struct DivergenceBreakdown {
    double rr_square = 0.0;         ///< (f^a)'/(1-mu) (d_{r*} phi)^2
    double angular = 0.0;           ///< (r-3M)/r^2 (f^a |grad phi|^2 + f^b sum |grad Omega phi|^2)
    double lagrangian = 0.0;        ///< f^a gradient-squared term; cancels identically
    double completed_square = 0.0;  ///< (f^b)'/(1-mu) (d_{r*} Omega phi + beta Omega phi)^2
    double f_term = 0.0;            ///< F (Omega phi)^2
    double zeroth_order = 0.0;      ///< f^b mu (3 - 4 mu)/(2 r^3) (Omega phi)^2
    double aux = 0.0;               ///< K^aux, when requested
    double total = 0.0;

    double sum_of_parts() const noexcept {
        return rr_square + angular + lagrangian + completed_square + f_term + zeroth_order + aux;
    }
};

struct CombinedDivergence {
    double total = 0.0;
    DivergenceBreakdown parts;
};

/// Flux densities of a current across constant-t and constant-r* lines.
///
/// With time = r^2 int J_t dA and rstar = r^2 int J_{r*} dA, the divergence
/// theorem in (t, r*) reads
///
///     (1 - mu) r^2 int K dA = -d_t(time) + d_{r*}(rstar),
///
/// so `time` is the energy density carried by a constant-t slice and a
/// constant (t + r*) / (t - r*) null line carries time -/+ rstar per unit t.
struct FluxComponents {
    double time = 0.0;
    double rstar = 0.0;
};

enum class CurrentKind { J, J_aux, J_T };

/// (r - 3M)/r^2, equal to mu'/(2(1-mu)) + (1-mu)/r.
double angular_coefficient(const RadialPoint& p) noexcept;

/// Box of h = f' + 2(1-mu) f/r, in the expanded form that uses f', f'', f'''.
double box_lagrangian(const MultiplierEval& f, const RadialPoint& p) noexcept;

/// r^2 int K^{V,0} dA for V = f d_{r*}. The spacetime gradient squared is
/// expanded once as (1-mu)^{-1}((d_{r*}phi)^2 - (d_t phi)^2) + |grad phi|^2.
double kv0_sphere(const Moments& m, const MultiplierEval& f, const RadialPoint& p) noexcept;

/// r^2 int K^{V,1} dA.
double kv1_sphere(const Moments& m, const MultiplierEval& f, const RadialPoint& p) noexcept;

/// r^2 int K^{V,2} dA, the completed-square form with beta.
double kv2_sphere(const Moments& m, const MultiplierEval& f, const RadialPoint& p,
                  const MultiplierParams& params) noexcept;

/// K for J = J^{X^a,0}(phi) + sum_i J^{X^b,2}(Omega_i phi).
CombinedDivergence k_combined_sphere(const SphereJet& jet, const RadialPoint& p,
                                     const MultiplierParams& params) noexcept;

/// The right-hand side of the pointwise bound on K used in the nonnegativity
/// proof, after the Poincare step on each Omega_i phi:
///
///   r^2 [ (2 f^b (r-3M)/r^4 + f^b mu(3-4mu)/(2r^3) + F) sum int (Omega_i phi)^2
///         - 2 C_* (r-3M)/(alpha^2 r^4) int |grad phi|^2 ].
///
/// With sum int (Omega_i phi)^2 = r^2 int |grad phi|^2 this is
/// suffices2(r) * sum int (Omega_i phi)^2 / r^4.
double lower_bound_sphere(const SphereJet& jet, const RadialPoint& p,
                          const MultiplierParams& params) noexcept;

/// K^{V,0} with V = r^{-3} d_{r*}.
double k_aux_sphere(const SphereJet& jet, const RadialPoint& p) noexcept;

/// Coefficient multiplying r^2 int (d_t phi)^2 dA in k_aux_sphere (it is -1/(2 r^4)).
double k_aux_dt_coefficient(const RadialPoint& p) noexcept;

/// r^2 int [ r^{-3}(d_{r*}phi)^2 + (r-3M)^2/r |Hess phi|^2
///           + r^3/((1-mu)(|r*|+1)^4) |grad phi|^2 (+ r^{-4}(d_t phi)^2) ] dA.
double controlled_sphere(const SphereJet& jet, const RadialPoint& p, bool include_time_derivative) noexcept;

FluxComponents flux_v0(const Moments& m, const MultiplierEval& f, const RadialPoint& p) noexcept;
FluxComponents flux_v1(const Moments& m, const MultiplierEval& f, const RadialPoint& p) noexcept;
FluxComponents flux_v2(const Moments& m, const MultiplierEval& f, const RadialPoint& p,
                       const MultiplierParams& params) noexcept;
FluxComponents flux_t(const Moments& m, const RadialPoint& p) noexcept;

/// Flux components of J (combined), J^aux, or the Killing energy current of phi
/// plus the same for the Omega_i phi (for J_T use flux_t on each block).
FluxComponents flux_components(const SphereJet& jet, const RadialPoint& p,
                               const MultiplierParams& params, CurrentKind which) noexcept;

/// Sphere moments of phi = u Y_l, lambda = l(l+1):
/// |grad phi|^2 -> lambda u^2/r^2, |Hess phi|^2 -> lambda(lambda-1) u^2/r^4, and the
/// Omega block is lambda times the phi moments with the angular entry lambda^2 u^2/r^2.
SphereJet mode_to_jet(const ModeState& m, const RadialPoint& p);

/// Invariants every physical jet satisfies: nonnegative squares, Cauchy-Schwarz on
/// the mixed entries, sum int (Omega_i phi)^2 = r^2 int |grad phi|^2, and the
/// Poincare inequality 2 sum int (Omega_i phi)^2 <= r^2 sum int |grad Omega_i phi|^2.
bool satisfies_jet_invariants(const SphereJet& jet, const RadialPoint& p, double rel_tol = 1e-12) noexcept;

}  // namespace morawetz
