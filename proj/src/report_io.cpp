#include "morawetz/report_io.hpp"

#include "json.hpp"

#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace morawetz {

namespace {

using nlohmann::json;

json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0.0 ? "inf" : "-inf";
}

json nums(const std::vector<double>& xs) {
    json out = json::array();
    for (const double x : xs) out.push_back(num(x));
    return out;
}

std::string g17(double x) { return fmt::format("{:.17g}", x); }

const char* kind_name(RecordKind k) { return k == RecordKind::margin ? "margin" : "report"; }

const char* constant_name(ConstantKind k) { return k == ConstantKind::prop2 ? "prop2" : "prop3"; }

json record_json(const CheckRecord& r) {
    return json{{"name", r.name},
                {"description", r.description},
                {"kind", kind_name(r.kind)},
                {"coordinate", r.coordinate},
                {"region", {num(r.lo), num(r.hi)}},
                {"grid_points", r.grid_points},
                {"refinement_levels", r.refinement_levels},
                {"trace", nums(r.trace)},
                {"min_margin", num(r.min_margin)},
                {"argmin", num(r.argmin)},
                {"stable", r.stable},
                {"passed", r.passed}};
}

json report_value(const CertificationReport& report) {
    json checks = json::array();
    for (const CheckResult& c : report.checks) {
        json records = json::array();
        for (const CheckRecord& r : c.records) records.push_back(record_json(r));
        checks.push_back(json{{"name", c.name}, {"passed", c.passed}, {"records", records}});
    }
    return json{{"mass", num(report.mass)},
                {"alpha", num(report.alpha)},
                {"c_star", num(report.c_star)},
                {"worst_margin", num(report.worst_margin())},
                {"verdict", report.verdict ? "pass" : "fail"},
                {"checks", checks}};
}

json sample_json(const RatioSample& s) {
    return json{{"ell", s.ell}, {"r_star", num(s.r_star)}, {"r", num(s.r)}, {"ratio", num(s.ratio)}};
}

json region_json(const TrapezoidRegion& r) {
    return json{{"t1", num(r.t1)}, {"t2", num(r.t2)}, {"r1", num(r.r1)}, {"r2", num(r.r2)}};
}

}  // namespace

std::string certification_json(const CertificationReport& report) { return report_value(report).dump(2) + "\n"; }

std::string scan_json(const AlphaScanResult& scan) {
    json table = json::array();
    json reports = json::array();
    for (const CertificationReport& r : scan.reports) {
        json row{{"alpha", num(r.alpha)}, {"verdict", r.verdict ? "pass" : "fail"},
                 {"worst_margin", num(r.worst_margin())}};
        for (const CheckResult& c : r.checks) {
            for (const CheckRecord& rec : c.records) {
                if (rec.kind == RecordKind::margin) row["margins"][rec.name] = num(rec.min_margin);
            }
        }
        table.push_back(row);
        reports.push_back(report_value(r));
    }
    json out{{"certified_alpha", scan.certified ? num(scan.reports[*scan.certified].alpha) : json(nullptr)},
             {"table", table},
             {"reports", reports}};
    return out.dump(2) + "\n";
}

std::string margins_csv(const std::vector<CertificationReport>& reports) {
    std::string out = "alpha,check,record,kind,coordinate,lo,hi,grid_points,level,margin,argmin,stable,passed\n";
    for (const CertificationReport& rep : reports) {
        for (const CheckResult& c : rep.checks) {
            for (const CheckRecord& r : c.records) {
                for (std::size_t level = 0; level < r.trace.size(); ++level) {
                    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", g17(rep.alpha), c.name, r.name,
                                       kind_name(r.kind), r.coordinate, g17(r.lo), g17(r.hi), r.grid_points, level,
                                       g17(r.trace[level]), g17(r.argmin), r.stable ? 1 : 0, r.passed ? 1 : 0);
                }
            }
        }
    }
    return out;
}

std::string profile_csv(const std::vector<ProfileRow>& rows, double alpha) {
    std::string out = "alpha,check,coordinate,location,value,margin\n";
    for (const ProfileRow& r : rows) {
        out += fmt::format("{},{},{},{},{},{}\n", g17(alpha), r.check, r.coordinate, g17(r.location), g17(r.value),
                           g17(r.margin));
    }
    return out;
}

std::string constants_json(const std::vector<BestConstantReport>& reports) {
    json out = json::array();
    for (const BestConstantReport& r : reports) {
        json per_ell = json::array();
        for (const RatioSample& s : r.per_ell) per_ell.push_back(sample_json(s));
        out.push_back(json{{"which", constant_name(r.kind)},
                           {"alpha", num(r.alpha)},
                           {"c_star", num(r.c_star)},
                           {"finite", r.finite},
                           {"constant", num(r.constant)},
                           {"argmax", sample_json(r.argmax)},
                           {"ell0_ratio", num(r.ell0_ratio)},
                           {"ell0_expected", num(r.ell0_expected)},
                           {"grid", r.grid},
                           {"diagnostic", r.diagnostic},
                           {"indefinite_at", r.indefinite_at ? sample_json(*r.indefinite_at) : json(nullptr)},
                           {"validation_samples", r.validation_samples},
                           {"worst_violation", num(r.worst_violation)},
                           {"per_ell", per_ell}});
    }
    return out.dump(2) + "\n";
}

std::string constants_csv(const std::vector<BestConstantReport>& reports) {
    std::string out = "which,ell,r_star,r,ratio\n";
    for (const BestConstantReport& r : reports) {
        for (const RatioSample& s : r.per_ell) {
            out += fmt::format("{},{},{},{},{}\n", constant_name(r.kind), s.ell, g17(s.r_star), g17(s.r),
                               g17(s.ratio));
        }
    }
    return out;
}

std::string energy_csv(const FieldHistory& hist) {
    std::string out = "t,energy\n";
    for (std::size_t i = 0; i < hist.energy.size(); ++i) {
        out += fmt::format("{},{}\n", g17(hist.energy_times[i]), g17(hist.energy[i]));
    }
    return out;
}

std::string divergence_csv(const DivergenceStudy& study) {
    std::string out = "h,bulk_k,flux_j,defect_j,bulk_aux,flux_aux,defect_aux,flux_t,energy_drift,ratio_j,ratio_aux,ratio_t\n";
    for (std::size_t i = 0; i < study.rows.size(); ++i) {
        const DivergenceRow& r = study.rows[i];
        const auto ratio = [&](const std::vector<double>& v) { return i == 0 ? std::string() : g17(v[i - 1]); };
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", g17(r.h), g17(r.bulk_k), g17(r.flux_j),
                           g17(r.defect_j()), g17(r.bulk_aux), g17(r.flux_aux), g17(r.defect_aux()), g17(r.flux_t),
                           g17(r.energy_drift), ratio(study.ratio_j), ratio(study.ratio_aux), ratio(study.ratio_t));
    }
    return out;
}

std::string flat_csv(const FlatStudy& study) {
    std::string out = "h,l2_error,order\n";
    for (std::size_t i = 0; i < study.rows.size(); ++i) {
        out += fmt::format("{},{},{}\n", g17(study.rows[i].h), g17(study.rows[i].l2_error),
                           i == 0 ? std::string() : g17(study.orders[i - 1]));
    }
    return out;
}

std::string evolve_json(const EvolveSummary& s) {
    const EvolveSettings& e = s.settings;
    json out{{"mass", num(s.mass)},
             {"alpha", num(s.alpha)},
             {"c_star", num(s.c_star)},
             {"ell", e.ell},
             {"flat", e.flat},
             {"domain", {num(e.rstar_min), num(e.rstar_max)}},
             {"h", num(e.h)},
             {"courant", num(e.courant)},
             {"t_final", num(e.t_final)},
             {"bump",
              {{"center", num(e.bump.center)},
               {"width", num(e.bump.width)},
               {"amplitude", num(e.bump.amplitude)},
               {"velocity", num(e.bump.velocity)}}},
             {"energy_drift", num(s.energy_drift)},
             {"max_abs_u", num(s.max_abs_u)}};
    if (s.divergence) {
        out["region"] = region_json(e.region);
        out["divergence"] = {{"ratio_j", nums(s.divergence->ratio_j)},
                             {"ratio_aux", nums(s.divergence->ratio_aux)},
                             {"ratio_t", nums(s.divergence->ratio_t)}};
    }
    if (s.flat) out["flat_orders"] = nums(s.flat->orders);
    return out.dump(2) + "\n";
}

std::string theorem1_json(const Theorem1Record& r) {
    json out{{"alpha", num(r.alpha)},
             {"c_star", num(r.c_star)},
             {"region", region_json(r.region)},
             {"runs", r.runs.size()},
             {"empirical_c", num(r.empirical_c)},
             {"empirical_c_fine", num(r.empirical_c_fine)},
             {"empirical_c_shifted", num(r.empirical_c_shifted)},
             {"refinement_change", num(r.refinement_change)},
             {"shift_change", num(r.shift_change)},
             {"max_integrated_prop3_ratio", num(r.max_prop3_ratio)},
             {"worst_relative_k", num(r.worst_relative_k)},
             {"max_energy_drift", num(r.max_energy_drift)},
             {"finite", r.finite},
             {"stable", r.stable},
             {"shift_invariant", r.shift_invariant}};
    return out.dump(2) + "\n";
}

std::string theorem1_csv(const Theorem1Record& r) {
    std::string out =
        "run,ell,center,width,amplitude,velocity,data_norm,bulk_controlled,ratio,ratio_fine,ratio_shifted,bulk_k,"
        "bulk_k_plus_aux,integrated_prop3_ratio,min_relative_k,energy_drift,max_phi,local_energy_start,"
        "local_energy_end\n";
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
        const RunRecord& x = r.runs[i];
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", i, x.ell, g17(x.bump.center),
                           g17(x.bump.width), g17(x.bump.amplitude), g17(x.bump.velocity), g17(x.data_norm),
                           g17(x.bulk_controlled), g17(x.ratio), g17(x.ratio_fine), g17(x.ratio_shifted),
                           g17(x.bulk_k), g17(x.bulk_k_plus_aux), g17(x.integrated_prop3_ratio),
                           g17(x.min_relative_k), g17(x.energy_drift), g17(x.max_phi), g17(x.local_energy_start),
                           g17(x.local_energy_end));
    }
    return out;
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace morawetz
