#include "morawetz/rw_solver.hpp"

#include "morawetz/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace morawetz {

double rw_potential(int ell, double r, const Geometry& g) {
    const double m = g.mass();
    if (!(r > 2.0 * m)) throw std::domain_error("rw_potential: r must exceed 2M");
    const double lambda = static_cast<double>(ell) * (ell + 1);
    const double a = (r - 2.0 * m) / r;
    return a * (lambda / (r * r) + 2.0 * m / (r * r * r));
}

double BumpData::value(double r_star) const noexcept {
    const double s = (r_star - center) / width;
    if (std::abs(s) >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double BumpData::derivative(double r_star) const noexcept {
    const double s = (r_star - center) / width;
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    return value(r_star) * (-2.0 * s / (q * q)) / width;
}

void EvolutionConfig::validate() const {
    if (!(mass >= 0.0)) throw std::invalid_argument("evolve: mass must be nonnegative");
    if (ell < 0) throw std::invalid_argument("evolve: ell must be nonnegative");
    if (mass == 0.0 && ell != 0) throw std::invalid_argument("evolve: flat space supports ell = 0 only");
    if (!(rstar_max > rstar_min)) throw std::invalid_argument("evolve: empty r* domain");
    if (!(h > 0.0) || (rstar_max - rstar_min) / h < 4.0) throw std::invalid_argument("evolve: bad spacing");
    if (!(courant > 0.0 && courant <= 1.0)) throw std::invalid_argument("evolve: Courant ratio must lie in (0, 1]");
    if (!(t_final >= t_start)) throw std::invalid_argument("evolve: t_final before t_start");
    if (!u0 || !ut0) throw std::invalid_argument("evolve: initial data missing");
    if (boundary != "dirichlet") throw std::invalid_argument("evolve: unknown boundary treatment " + boundary);
    if (!(record_max > record_min)) throw std::invalid_argument("evolve: empty recording window");
}

bool FieldHistory::consistent() const noexcept {
    const std::size_t n = times.size();
    if (u.size() != n || ut.size() != n || ur.size() != n) return false;
    if (energy.size() != energy_times.size()) return false;
    for (std::size_t l = 0; l < n; ++l) {
        if (u[l].size() != points || ut[l].size() != points || ur[l].size() != points) return false;
        for (std::size_t i = 0; i < points; ++i) {
            if (!std::isfinite(u[l][i]) || !std::isfinite(ut[l][i]) || !std::isfinite(ur[l][i])) return false;
        }
    }
    return std::all_of(energy.begin(), energy.end(), [](double e) { return std::isfinite(e); });
}

double FieldHistory::energy_drift() const noexcept {
    if (energy.empty() || energy.front() == 0.0) return 0.0;
    double drift = 0.0;
    for (const double e : energy) drift = std::max(drift, std::abs(e - energy.front()));
    return drift / std::abs(energy.front());
}

FieldHistory evolve(const EvolutionConfig& cfg) {
    cfg.validate();
    const double h = cfg.h;
    const double k = cfg.k();
    const std::size_t n = static_cast<std::size_t>(std::llround((cfg.rstar_max - cfg.rstar_min) / h));
    const std::size_t nodes = n + 1;
    const auto steps = static_cast<std::size_t>(std::ceil((cfg.t_final - cfg.t_start) / k - 1e-9));

    std::vector<double> x(nodes);
    std::vector<double> pot(nodes, 0.0);
    const bool flat = cfg.mass == 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        x[i] = cfg.rstar_min + h * static_cast<double>(i);
        if (!flat) {
            const Geometry g(cfg.mass);
            pot[i] = rw_potential(cfg.ell, r_of_rstar(x[i], g), g);
        }
    }

    const double lo = std::max(cfg.record_min, cfg.rstar_min);
    const double hi = std::min(cfg.record_max, cfg.rstar_max);
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil((lo - cfg.rstar_min) / h - 1e-9)));
    const auto last = std::min(n, static_cast<std::size_t>(std::floor((hi - cfg.rstar_min) / h + 1e-9)));
    if (first > last) throw std::invalid_argument("evolve: recording window misses the grid");

    FieldHistory hist;
    hist.mass = cfg.mass;
    hist.ell = cfg.ell;
    hist.h = h;
    hist.k = k;
    hist.rstar0 = x[first];
    hist.points = last - first + 1;

    const double inv_h2 = 1.0 / (h * h);
    const auto apply_l = [&](const std::vector<double>& f, std::vector<double>& out) {
        out[0] = out[n] = 0.0;
        for (std::size_t i = 1; i < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv_h2 - pot[i] * f[i];
    };
    const auto energy = [&](const std::vector<double>& next, const std::vector<double>& now) {
        double e = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double v = (next[i] - now[i]) / k;
            e += v * v + pot[i] * next[i] * now[i];
        }
        for (std::size_t i = 0; i < n; ++i) e += (next[i + 1] - next[i]) * (now[i + 1] - now[i]) * inv_h2;
        return 0.5 * h * e;
    };

    std::vector<double> prev(nodes), cur(nodes), next(nodes), lu(nodes), lut(nodes), v0(nodes);
    for (std::size_t i = 1; i < n; ++i) {
        cur[i] = cfg.u0(x[i]);
        v0[i] = cfg.ut0(x[i]);
    }
    apply_l(cur, lu);
    apply_l(v0, lut);
    for (std::size_t i = 1; i < n; ++i) {
        next[i] = cur[i] + k * v0[i] + 0.5 * k * k * lu[i] + k * k * k / 6.0 * lut[i];
    }

    const auto record = [&](std::size_t level, const std::vector<double>& before, const std::vector<double>& now,
                            const std::vector<double>& after, bool initial) {
        hist.times.push_back(cfg.t_start + k * static_cast<double>(level));
        std::vector<double> u(hist.points), ut(hist.points), ur(hist.points);
        for (std::size_t j = 0; j < hist.points; ++j) {
            const std::size_t i = first + j;
            u[j] = now[i];
            ut[j] = initial ? (i == 0 || i == n ? 0.0 : v0[i]) : (after[i] - before[i]) / (2.0 * k);
            if (i == 0) {
                ur[j] = (now[1] - now[0]) / h;
            } else if (i == n) {
                ur[j] = (now[n] - now[n - 1]) / h;
            } else {
                ur[j] = (now[i + 1] - now[i - 1]) / (2.0 * h);
            }
        }
        hist.u.push_back(std::move(u));
        hist.ut.push_back(std::move(ut));
        hist.ur.push_back(std::move(ur));
    };

    record(0, cur, cur, next, true);
    double e0 = energy(next, cur);
    hist.energy.push_back(e0);
    hist.energy_times.push_back(cfg.t_start + 0.5 * k);
    if (!std::isfinite(e0)) throw InstabilityError("evolve: initial energy is not finite", cfg.t_start, e0);

    for (std::size_t level = 1; level <= steps; ++level) {
        prev.swap(cur);
        cur.swap(next);
        apply_l(cur, lu);
        for (std::size_t i = 1; i < n; ++i) next[i] = 2.0 * cur[i] - prev[i] + k * k * lu[i];
        next[0] = next[n] = 0.0;
        record(level, prev, cur, next, false);
        const double e = energy(next, cur);
        const double t = cfg.t_start + k * (static_cast<double>(level) + 0.5);
        hist.energy.push_back(e);
        hist.energy_times.push_back(t);
        const double ratio = e0 > 0.0 ? e / e0 : (e == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
        if (!std::isfinite(e) || ratio > 100.0) {
            throw InstabilityError(fmt::format("evolve: energy grew by {:.6g} by t = {:.6g} (norm limit 10x)",
                                               ratio, t),
                                   t, ratio);
        }
    }
    return hist;
}

ModeState mode_state_at(const FieldHistory& hist, std::size_t level, std::size_t index, const RadialPoint& p) {
    const double u = hist.u[level][index];
    const double r = p.r;
    return ModeState{hist.ell, u / r, hist.ur[level][index] / r - p.one_minus_mu * u / (r * r),
                     hist.ut[level][index] / r};
}

namespace {

std::vector<RadialPoint> window_points(const FieldHistory& hist) {
    if (!(hist.mass > 0.0)) throw std::invalid_argument("jets need a positive mass");
    const Geometry g(hist.mass);
    std::vector<RadialPoint> pts(hist.points);
    for (std::size_t i = 0; i < hist.points; ++i) pts[i] = point_at_rstar(hist.rstar_at(i), g);
    return pts;
}

std::size_t level_of(const FieldHistory& hist, double t) {
    if (hist.times.empty()) throw std::out_of_range("empty history");
    const double s = (t - hist.times.front()) / hist.k;
    const double n = std::round(s);
    if (std::abs(s - n) > 1e-6 || n < 0.0 || n >= static_cast<double>(hist.levels())) {
        throw std::out_of_range(fmt::format("time {:.17g} is not a recorded level", t));
    }
    return static_cast<std::size_t>(n);
}

/// Cubic Lagrange interpolation of node values at x, using nodes j-1..j+2.
double interpolate(const std::function<double(std::size_t)>& value, const FieldHistory& hist, double x) {
    const double s = (x - hist.rstar0) / hist.h;
    auto j = static_cast<std::ptrdiff_t>(std::floor(s));
    j = std::clamp<std::ptrdiff_t>(j, 1, static_cast<std::ptrdiff_t>(hist.points) - 3);
    const double t = s - static_cast<double>(j);
    const double w[4] = {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                         -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
    double out = 0.0;
    for (int q = 0; q < 4; ++q) out += w[q] * value(static_cast<std::size_t>(j - 1 + q));
    return out;
}

void require_inside(const FieldHistory& hist, double lo, double hi) {
    const double first = hist.rstar_at(0) + 2.0 * hist.h;
    const double last = hist.rstar_at(hist.points - 1) - 2.0 * hist.h;
    if (lo < first - 1e-9 * hist.h || hi > last + 1e-9 * hist.h) {
        throw std::out_of_range(fmt::format("region [{:.6g}, {:.6g}] exceeds the recorded domain [{:.6g}, {:.6g}]",
                                            lo, hi, first, last));
    }
}

/// Trapezoid integral over [lo, hi] of node values, with cubic interpolation at the ends.
double slice_integral(const std::function<double(std::size_t)>& value, const FieldHistory& hist, double lo,
                      double hi) {
    const double h = hist.h;
    const double s_lo = (lo - hist.rstar0) / h;
    const double s_hi = (hi - hist.rstar0) / h;
    const auto i_lo = static_cast<std::size_t>(std::ceil(s_lo - 1e-12));
    const auto i_hi = static_cast<std::size_t>(std::floor(s_hi + 1e-12));
    const double f_lo = interpolate(value, hist, lo);
    const double f_hi = interpolate(value, hist, hi);
    if (i_lo > i_hi) return 0.5 * (hi - lo) * (f_lo + f_hi);
    double sum = 0.0;
    double left = value(i_lo);
    for (std::size_t i = i_lo; i < i_hi; ++i) {
        const double right = value(i + 1);
        sum += 0.5 * h * (left + right);
        left = right;
    }
    const double x_lo = hist.rstar_at(i_lo);
    const double x_hi = hist.rstar_at(i_hi);
    sum += 0.5 * std::max(0.0, x_lo - lo) * (f_lo + value(i_lo));
    sum += 0.5 * std::max(0.0, hi - x_hi) * (value(i_hi) + f_hi);
    return sum;
}

/// Node values at one level, evaluated lazily and cached over the needed index span.
class LevelCache {
public:
    LevelCache(std::size_t points, std::function<double(std::size_t)> fn)
        : values_(points, 0.0), done_(points, false), fn_(std::move(fn)) {}
    double operator()(std::size_t i) {
        if (!done_[i]) {
            values_[i] = fn_(i);
            done_[i] = true;
        }
        return values_[i];
    }

private:
    std::vector<double> values_;
    std::vector<bool> done_;
    std::function<double(std::size_t)> fn_;
};

double density_value(Density d, const SphereJet& jet, const RadialPoint& p, const MultiplierParams& params) {
    switch (d) {
        case Density::K:
            return k_combined_sphere(jet, p, params).total;
        case Density::K_aux:
            return k_aux_sphere(jet, p);
        case Density::K_plus_aux:
            return k_combined_sphere(jet, p, params).total + k_aux_sphere(jet, p);
        case Density::controlled:
            return controlled_sphere(jet, p, true);
        case Density::controlled_spatial:
            return controlled_sphere(jet, p, false);
        case Density::lower_bound:
            return lower_bound_sphere(jet, p, params);
    }
    return 0.0;
}

}  // namespace

std::vector<std::vector<SphereJet>> assemble_jets(const FieldHistory& hist) {
    const std::vector<RadialPoint> pts = window_points(hist);
    std::vector<std::vector<SphereJet>> out(hist.levels(), std::vector<SphereJet>(hist.points));
    for (std::size_t l = 0; l < hist.levels(); ++l) {
        for (std::size_t i = 0; i < hist.points; ++i) out[l][i] = mode_to_jet(mode_state_at(hist, l, i, pts[i]), pts[i]);
    }
    return out;
}

void TrapezoidRegion::validate() const {
    if (!(t1 < t2)) throw std::invalid_argument("region: need t1 < t2");
    if (!(r1 < r2)) throw std::invalid_argument("region: need r1* < r2*");
}

double bulk_integral(const FieldHistory& hist, const TrapezoidRegion& region, Density density,
                     const MultiplierParams& params) {
    region.validate();
    const std::vector<RadialPoint> pts = window_points(hist);
    const std::size_t n1 = level_of(hist, region.t1);
    const std::size_t n2 = level_of(hist, region.t2);
    require_inside(hist, region.left(region.t1), region.right(region.t1));
    std::vector<double> slices(n2 - n1 + 1);
    parallel_for(slices.size(), [&](std::size_t s) {
        const std::size_t level = n1 + s;
        const double t = hist.times[level];
        LevelCache cache(hist.points, [&](std::size_t i) {
            const SphereJet jet = mode_to_jet(mode_state_at(hist, level, i, pts[i]), pts[i]);
            return pts[i].one_minus_mu * density_value(density, jet, pts[i], params);
        });
        slices[s] = slice_integral(std::ref(cache), hist, region.left(t), region.right(t));
    });
    double total = 0.0;
    for (std::size_t s = 0; s < slices.size(); ++s) {
        const double w = (s == 0 || s + 1 == slices.size()) ? 0.5 : 1.0;
        total += w * hist.k * slices[s];
    }
    return total;
}

BoundaryFlux boundary_flux(const FieldHistory& hist, const TrapezoidRegion& region, CurrentKind which,
                           const MultiplierParams& params) {
    region.validate();
    const std::vector<RadialPoint> pts = window_points(hist);
    const std::size_t n1 = level_of(hist, region.t1);
    const std::size_t n2 = level_of(hist, region.t2);
    require_inside(hist, region.left(region.t1), region.right(region.t1));

    const auto flux_at = [&](std::size_t level, std::size_t i) {
        const SphereJet jet = mode_to_jet(mode_state_at(hist, level, i, pts[i]), pts[i]);
        return flux_components(jet, pts[i], params, which);
    };
    BoundaryFlux out;
    {
        LevelCache p(hist.points, [&](std::size_t i) { return flux_at(n1, i).time; });
        out.past = slice_integral(std::ref(p), hist, region.left(region.t1), region.right(region.t1));
        LevelCache f(hist.points, [&](std::size_t i) { return flux_at(n2, i).time; });
        out.future = slice_integral(std::ref(f), hist, region.left(region.t2), region.right(region.t2));
    }
    std::vector<double> left(n2 - n1 + 1), right(n2 - n1 + 1);
    parallel_for(left.size(), [&](std::size_t s) {
        const std::size_t level = n1 + s;
        const double t = hist.times[level];
        LevelCache plus(hist.points, [&](std::size_t i) {
            const FluxComponents c = flux_at(level, i);
            return c.time + c.rstar;
        });
        LevelCache minus(hist.points, [&](std::size_t i) {
            const FluxComponents c = flux_at(level, i);
            return c.time - c.rstar;
        });
        left[s] = interpolate(std::ref(plus), hist, region.left(t));
        right[s] = interpolate(std::ref(minus), hist, region.right(t));
    });
    for (std::size_t s = 0; s < left.size(); ++s) {
        const double w = (s == 0 || s + 1 == left.size()) ? 0.5 : 1.0;
        out.left += w * hist.k * left[s];
        out.right += w * hist.k * right[s];
    }
    return out;
}

double min_relative_k(const FieldHistory& hist, const TrapezoidRegion& region, const MultiplierParams& params) {
    region.validate();
    const std::vector<RadialPoint> pts = window_points(hist);
    const std::size_t n1 = level_of(hist, region.t1);
    const std::size_t n2 = level_of(hist, region.t2);
    std::vector<double> lows(n2 - n1 + 1, 0.0), highs(n2 - n1 + 1, 0.0);
    parallel_for(lows.size(), [&](std::size_t s) {
        const std::size_t level = n1 + s;
        const double t = hist.times[level];
        for (std::size_t i = 0; i < hist.points; ++i) {
            const double x = hist.rstar_at(i);
            if (x < region.left(t) || x > region.right(t)) continue;
            const double k = k_combined_sphere(mode_to_jet(mode_state_at(hist, level, i, pts[i]), pts[i]), pts[i], params).total;
            lows[s] = std::min(lows[s], k);
            highs[s] = std::max(highs[s], std::abs(k));
        }
    });
    const double low = *std::min_element(lows.begin(), lows.end());
    const double high = *std::max_element(highs.begin(), highs.end());
    return high > 0.0 ? low / high : 0.0;
}

std::pair<double, double> padded_domain(const TrapezoidRegion& region, double t_start, double padding) {
    const double reach = region.t1 - t_start;
    return {region.left(region.t1) - reach - padding, region.right(region.t1) + reach + padding};
}

namespace {

struct RunSetup {
    int ell;
    BumpData bump;
};

FieldHistory run_once(const EnsembleConfig& cfg, const RunSetup& setup, double h, double shift) {
    TrapezoidRegion region = cfg.region;
    region.t1 += shift;
    region.t2 += shift;
    const auto [lo, hi] = padded_domain(region, region.t1, cfg.padding);
    EvolutionConfig ec;
    ec.mass = cfg.mass;
    ec.ell = setup.ell;
    ec.h = h;
    ec.courant = cfg.courant;
    ec.rstar_min = lo;
    ec.rstar_max = hi;
    ec.t_start = region.t1;
    ec.t_final = region.t2;
    const BumpData b = setup.bump;
    ec.u0 = [b](double x) { return b.value(x); };
    ec.ut0 = [b](double x) { return -b.velocity * b.derivative(x); };
    ec.record_min = region.left(region.t1) - 4.0 * h;
    ec.record_max = region.right(region.t1) + 4.0 * h;
    return evolve(ec);
}

double controlled_ratio(const FieldHistory& hist, const TrapezoidRegion& region, const MultiplierParams& params,
                        double* norm_out = nullptr, double* bulk_out = nullptr) {
    const double norm = boundary_flux(hist, region, CurrentKind::J_T, params).past;
    const double bulk = bulk_integral(hist, region, Density::controlled, params);
    if (norm_out) *norm_out = norm;
    if (bulk_out) *bulk_out = bulk;
    return norm > 0.0 ? bulk / norm : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

Theorem1Record theorem1_check(const EnsembleConfig& cfg, const MultiplierParams& params) {
    cfg.region.validate();
    if (cfg.runs < 1 || cfg.ell_max < 0) throw std::invalid_argument("theorem1_check: empty ensemble");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double middle = 0.5 * (cfg.region.r1 + cfg.region.r2);
    std::vector<RunSetup> setups(static_cast<std::size_t>(cfg.runs));
    for (std::size_t j = 0; j < setups.size(); ++j) {
        RunSetup& s = setups[j];
        s.ell = static_cast<int>(j % static_cast<std::size_t>(cfg.ell_max + 1));
        s.bump.center = middle + cfg.center_spread * (2.0 * unit(rng) - 1.0);
        s.bump.width = cfg.width_min + (cfg.width_max - cfg.width_min) * unit(rng);
        s.bump.amplitude = 0.5 + 1.5 * unit(rng);
        s.bump.velocity = 2.0 * unit(rng) - 1.0;
    }

    Theorem1Record out;
    out.alpha = params.alpha;
    out.c_star = params.c_star;
    out.region = cfg.region;
    out.runs.resize(setups.size());
    const TrapezoidRegion region = cfg.region;
    TrapezoidRegion shifted = region;
    shifted.t1 += cfg.time_shift;
    shifted.t2 += cfg.time_shift;

    parallel_for(setups.size(), [&](std::size_t j) {
        RunRecord& rec = out.runs[j];
        rec.ell = setups[j].ell;
        rec.bump = setups[j].bump;
        const FieldHistory hist = run_once(cfg, setups[j], cfg.h, 0.0);
        rec.ratio = controlled_ratio(hist, region, params, &rec.data_norm, &rec.bulk_controlled);
        rec.bulk_k = bulk_integral(hist, region, Density::K, params);
        rec.bulk_k_plus_aux = bulk_integral(hist, region, Density::K_plus_aux, params);
        rec.integrated_prop3_ratio = rec.bulk_k_plus_aux > 0.0 ? rec.bulk_controlled / rec.bulk_k_plus_aux
                                                               : std::numeric_limits<double>::infinity();
        rec.min_relative_k = min_relative_k(hist, region, params);
        rec.energy_drift = hist.energy_drift();
        const std::vector<RadialPoint> pts = window_points(hist);
        for (std::size_t l = 0; l < hist.levels(); ++l) {
            for (std::size_t i = 0; i < hist.points; ++i) {
                rec.max_phi = std::max(rec.max_phi, std::abs(hist.u[l][i]) / pts[i].r);
            }
        }
        const auto local_energy = [&](double t) {
            const std::size_t level = level_of(hist, t);
            LevelCache e(hist.points, [&](std::size_t i) {
                const SphereJet jet = mode_to_jet(mode_state_at(hist, level, i, pts[i]), pts[i]);
                return flux_components(jet, pts[i], params, CurrentKind::J_T).time;
            });
            return slice_integral(std::ref(e), hist, region.r1, region.r2);
        };
        rec.local_energy_start = local_energy(region.t1);
        rec.local_energy_end = local_energy(region.t2);
        if (cfg.refine) {
            rec.ratio_fine = controlled_ratio(run_once(cfg, setups[j], 0.5 * cfg.h, 0.0), region, params);
        }
        if (cfg.shift) {
            rec.ratio_shifted = controlled_ratio(run_once(cfg, setups[j], cfg.h, cfg.time_shift), shifted, params);
        }
    });

    out.worst_relative_k = 0.0;
    out.max_prop3_ratio = 0.0;
    for (const RunRecord& r : out.runs) {
        if (std::isfinite(r.ratio)) out.empirical_c = std::max(out.empirical_c, r.ratio);
        if (std::isfinite(r.ratio_fine)) out.empirical_c_fine = std::max(out.empirical_c_fine, r.ratio_fine);
        if (std::isfinite(r.ratio_shifted)) out.empirical_c_shifted = std::max(out.empirical_c_shifted, r.ratio_shifted);
        out.max_prop3_ratio = std::max(out.max_prop3_ratio, r.integrated_prop3_ratio);
        out.worst_relative_k = std::min(out.worst_relative_k, r.min_relative_k);
        out.max_energy_drift = std::max(out.max_energy_drift, r.energy_drift);
    }
    out.finite = std::isfinite(out.empirical_c) && out.empirical_c > 0.0;
    if (cfg.refine && out.empirical_c > 0.0) {
        out.refinement_change = std::abs(out.empirical_c_fine / out.empirical_c - 1.0);
        out.stable = out.refinement_change <= 0.10;
    }
    if (cfg.shift && out.empirical_c > 0.0) {
        out.shift_change = std::abs(out.empirical_c_shifted / out.empirical_c - 1.0);
        out.shift_invariant = out.shift_change <= 0.01;
    }
    return out;
}

}  // namespace morawetz

namespace morawetz {

DivergenceStudy divergence_study(const EvolutionConfig& base, const TrapezoidRegion& region,
                                 const MultiplierParams& params, int levels) {
    if (levels < 1) throw std::invalid_argument("divergence_study: need at least one level");
    DivergenceStudy out;
    double h = base.h;
    for (int level = 0; level < levels; ++level, h *= 0.5) {
        EvolutionConfig cfg = base;
        cfg.h = h;
        const FieldHistory hist = evolve(cfg);
        DivergenceRow row;
        row.h = h;
        row.bulk_k = bulk_integral(hist, region, Density::K, params);
        row.flux_j = boundary_flux(hist, region, CurrentKind::J, params).net();
        row.bulk_aux = bulk_integral(hist, region, Density::K_aux, params);
        row.flux_aux = boundary_flux(hist, region, CurrentKind::J_aux, params).net();
        row.flux_t = boundary_flux(hist, region, CurrentKind::J_T, params).net();
        row.energy_drift = hist.energy_drift();
        out.rows.push_back(row);
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        const DivergenceRow& a = out.rows[i - 1];
        const DivergenceRow& b = out.rows[i];
        out.ratio_j.push_back(a.defect_j() / b.defect_j());
        out.ratio_aux.push_back(a.defect_aux() / b.defect_aux());
        out.ratio_t.push_back(a.flux_t / b.flux_t);
    }
    return out;
}

FlatStudy flat_space_study(const BumpData& pulse, double rstar_min, double rstar_max, double duration, double h,
                           int levels, double courant) {
    if (levels < 1) throw std::invalid_argument("flat_space_study: need at least one level");
    FlatStudy out;
    for (int level = 0; level < levels; ++level, h *= 0.5) {
        EvolutionConfig cfg;
        cfg.mass = 0.0;
        cfg.ell = 0;
        cfg.rstar_min = rstar_min;
        cfg.rstar_max = rstar_max;
        cfg.h = h;
        cfg.courant = courant;
        cfg.t_start = 0.0;
        cfg.t_final = duration;
        cfg.u0 = [pulse](double x) { return pulse.value(x); };
        cfg.ut0 = [pulse](double x) { return -pulse.derivative(x); };
        const FieldHistory hist = evolve(cfg);
        const std::size_t last = hist.levels() - 1;
        const double t = hist.times[last];
        double err = 0.0;
        for (std::size_t i = 0; i < hist.points; ++i) {
            const double e = hist.u[last][i] - pulse.value(hist.rstar_at(i) - t);
            err += e * e;
        }
        out.rows.push_back(FlatRow{h, std::sqrt(h * err)});
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        out.orders.push_back(std::log2(out.rows[i - 1].l2_error / out.rows[i].l2_error));
    }
    return out;
}

}  // namespace morawetz
