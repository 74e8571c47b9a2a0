// morawetz: batch driver for the certification, constants and evolution runs.
//
// Exit codes: 0 success, 1 configuration error, 2 inadmissible alpha or no
// finite constant, 3 numerical instability.

#include "CLI11.hpp"

#include "morawetz/config.hpp"
#include "morawetz/parallel.hpp"
#include "morawetz/report_io.hpp"
#include "morawetz/rw_solver.hpp"
#include "morawetz/verifier.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <iostream>
#include <optional>

using namespace morawetz;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kInadmissible = 2;
constexpr int kInstability = 3;

struct Options {
    std::string config_path;
    std::string out_dir;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
};

Config prepare(const Options& opt) {
    Config cfg = opt.config_path.empty() ? parse_config("{}") : load_config(opt.config_path);
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    if (opt.seed) apply_seed(cfg, *opt.seed);
    unsigned threads = cfg.threads;
    if (const char* env = std::getenv("MORAWETZ_THREADS"); env != nullptr && threads == 0) {
        try {
            threads = static_cast<unsigned>(std::stoul(env));
        } catch (const std::exception&) {
            throw ConfigError(std::string("MORAWETZ_THREADS is not a number: ") + env);
        }
    }
    if (opt.threads) threads = *opt.threads;
    set_thread_count(threads);
    return cfg;
}

/// The configured alpha, or the smallest certified one from a scan.
std::optional<double> resolve_alpha(const Config& cfg, const Geometry& g) {
    if (cfg.alpha) return cfg.alpha;
    const AlphaScanResult scan = scan_alpha(cfg.scan, g, cfg.verifier, false);
    if (!scan.certified) return std::nullopt;
    return scan.reports[*scan.certified].alpha;
}

int cmd_verify(const Config& cfg) {
    const Geometry g(cfg.mass);
    CertificationReport report;
    if (cfg.alpha) {
        report = certify(*cfg.alpha, g, cfg.verifier);
    } else {
        const AlphaScanResult scan = scan_alpha(cfg.scan, g, cfg.verifier, false);
        report = scan.certified ? scan.reports[*scan.certified] : scan.reports.back();
    }
    write_file(cfg.output_dir, "report.json", certification_json(report));
    write_file(cfg.output_dir, "margins.csv", margins_csv({report}));
    write_file(cfg.output_dir, "profile.csv",
               profile_csv(profile_checks(make_params(report.alpha, g), g, cfg.verifier, 400), report.alpha));
    fmt::print("alpha = {:.17g}  C_* = {:.17g}  worst margin = {:.6g}  verdict: {}\n", report.alpha, report.c_star,
               report.worst_margin(), report.verdict ? "pass" : "fail");
    return report.verdict ? kOk : kInadmissible;
}

int cmd_scan(const Config& cfg) {
    const Geometry g(cfg.mass);
    const AlphaScanResult scan = scan_alpha(cfg.scan, g, cfg.verifier, cfg.scan_exhaustive);
    write_file(cfg.output_dir, "scan.json", scan_json(scan));
    write_file(cfg.output_dir, "margins.csv", margins_csv(scan.reports));
    for (const CertificationReport& r : scan.reports) {
        fmt::print("alpha = {:<12.6g} worst margin = {:<14.6g} {}\n", r.alpha, r.worst_margin(),
                   r.verdict ? "pass" : "fail");
    }
    if (!scan.certified) {
        fmt::print("no sampled alpha passes\n");
        return kInadmissible;
    }
    fmt::print("certified alpha = {:.17g}\n", scan.reports[*scan.certified].alpha);
    return kOk;
}

int cmd_constants(const Config& cfg) {
    const Geometry g(cfg.mass);
    const std::optional<double> alpha = resolve_alpha(cfg, g);
    if (!alpha) {
        fmt::print(stderr, "no admissible alpha in the scan range\n");
        return kInadmissible;
    }
    const MultiplierParams params = make_params(*alpha, g);
    std::vector<BestConstantReport> reports;
    int code = kOk;
    std::vector<ConstantKind> kinds;
    if (cfg.constants_prop2) kinds.push_back(ConstantKind::prop2);
    if (cfg.constants_prop3) kinds.push_back(ConstantKind::prop3);
    for (const ConstantKind kind : kinds) {
        try {
            reports.push_back(best_constant(kind, params, g, cfg.constants));
        } catch (const NotSemidefiniteError& e) {
            fmt::print(stderr, "{}\n", e.what());
            code = kInadmissible;
            continue;
        }
        const BestConstantReport& r = reports.back();
        fmt::print("{}: C = {:.17g} at ell = {}, r* = {:.6g}; ell = 0 ratio {:.17g}; worst violation {:.3g}{}\n",
                   kind == ConstantKind::prop2 ? "prop2" : "prop3", r.constant, r.argmax.ell, r.argmax.r_star,
                   r.ell0_ratio, r.worst_violation, r.finite ? "" : "  (no finite constant: " + r.diagnostic + ")");
        if (!r.finite) code = kInadmissible;
    }
    write_file(cfg.output_dir, "constants.json", constants_json(reports));
    write_file(cfg.output_dir, "constants.csv", constants_csv(reports));
    return code;
}

int cmd_evolve(const Config& cfg) {
    const EvolveSettings& es = cfg.evolve;
    EvolveSummary summary;
    summary.settings = es;
    if (es.flat) {
        summary.mass = 0.0;
        const FlatStudy flat = flat_space_study(es.bump, es.rstar_min, es.rstar_max, es.t_final, es.h, es.levels,
                                                es.courant);
        write_file(cfg.output_dir, "flat_convergence.csv", flat_csv(flat));
        summary.flat = flat;
        for (std::size_t i = 0; i < flat.rows.size(); ++i) {
            fmt::print("h = {:<10.6g} L2 error = {:<14.6g}{}\n", flat.rows[i].h, flat.rows[i].l2_error,
                       i == 0 ? std::string() : fmt::format(" order {:.4f}", flat.orders[i - 1]));
        }
    } else {
        const Geometry g(cfg.mass);
        const std::optional<double> alpha = resolve_alpha(cfg, g);
        if (!alpha) {
            fmt::print(stderr, "no admissible alpha in the scan range\n");
            return kInadmissible;
        }
        const MultiplierParams params = make_params(*alpha, g);
        summary.mass = cfg.mass;
        summary.alpha = params.alpha;
        summary.c_star = params.c_star;
        EvolutionConfig ec;
        ec.mass = cfg.mass;
        ec.ell = es.ell;
        ec.rstar_min = es.rstar_min;
        ec.rstar_max = es.rstar_max;
        ec.h = es.h;
        ec.courant = es.courant;
        ec.t_start = 0.0;
        ec.t_final = es.t_final;
        const BumpData b = es.bump;
        ec.u0 = [b](double x) { return b.value(x); };
        ec.ut0 = [b](double x) { return -b.velocity * b.derivative(x); };
        const FieldHistory hist = evolve(ec);
        summary.energy_drift = hist.energy_drift();
        for (const auto& level : hist.u) {
            for (const double v : level) summary.max_abs_u = std::max(summary.max_abs_u, std::abs(v));
        }
        write_file(cfg.output_dir, "energy.csv", energy_csv(hist));
        const DivergenceStudy study = divergence_study(ec, es.region, params, es.levels);
        write_file(cfg.output_dir, "divergence.csv", divergence_csv(study));
        summary.divergence = study;
        for (std::size_t i = 0; i < study.rows.size(); ++i) {
            const DivergenceRow& r = study.rows[i];
            fmt::print("h = {:<10.6g} K-J defect {:<14.6g} aux defect {:<14.6g} energy-current net {:<14.6g}\n", r.h,
                       r.defect_j(), r.defect_aux(), r.flux_t);
        }
        fmt::print("energy drift {:.3g}\n", summary.energy_drift);
    }
    write_file(cfg.output_dir, "evolve.json", evolve_json(summary));
    return kOk;
}

int cmd_theorem1(const Config& cfg) {
    const Geometry g(cfg.mass);
    const std::optional<double> alpha = resolve_alpha(cfg, g);
    if (!alpha) {
        fmt::print(stderr, "no admissible alpha in the scan range\n");
        return kInadmissible;
    }
    const Theorem1Record rec = theorem1_check(cfg.ensemble, make_params(*alpha, g));
    write_file(cfg.output_dir, "theorem1.json", theorem1_json(rec));
    write_file(cfg.output_dir, "theorem1_runs.csv", theorem1_csv(rec));
    fmt::print("empirical C = {:.6g} (refined {:.6g}, shifted {:.6g}); refinement change {:.3g}, shift change {:.3g}\n",
               rec.empirical_c, rec.empirical_c_fine, rec.empirical_c_shifted, rec.refinement_change,
               rec.shift_change);
    return rec.finite && (!cfg.ensemble.refine || rec.stable) && (!cfg.ensemble.shift || rec.shift_invariant)
               ? kOk
               : kInadmissible;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical certification of a degenerate Morawetz estimate on Schwarzschild"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config_path, "JSON configuration file");
    app.add_option("--out", opt.out_dir, "output directory (overrides the config)");
    app.add_option("--threads", opt.threads, "worker threads (overrides MORAWETZ_THREADS)");
    app.add_option("--seed", opt.seed, "seed for every randomized block");

    int (*handler)(const Config&) = nullptr;
    app.add_subcommand("verify", "certify the configured alpha, or the smallest passing one")
        ->callback([&] { handler = cmd_verify; });
    app.add_subcommand("scan-alpha", "certification table over a log-spaced alpha range")
        ->callback([&] { handler = cmd_scan; });
    app.add_subcommand("constants", "best constants for the two coercivity propositions")
        ->callback([&] { handler = cmd_constants; });
    app.add_subcommand("evolve", "single evolution with divergence-theorem and convergence tables")
        ->callback([&] { handler = cmd_evolve; });
    app.add_subcommand("check-theorem1", "random-data ensemble for the integrated estimate")
        ->callback([&] { handler = cmd_theorem1; });
    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        const Config cfg = prepare(opt);
        return handler(cfg);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kConfigError;
    } catch (const InstabilityError& e) {
        fmt::print(stderr, "instability: {}\n", e.what());
        return kInstability;
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "invalid input: {}\n", e.what());
        return kConfigError;
    }
}
