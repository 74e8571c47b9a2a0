#pragma once

#include <optional>
#include <string>
#include <vector>

#include "morawetz/config.hpp"
#include "morawetz/rw_solver.hpp"
#include "morawetz/verifier.hpp"

namespace morawetz {

/// Outcome of one `evolve` command.
struct EvolveSummary {
    double mass = 1.0;
    double alpha = 0.0;
    double c_star = 0.0;
    EvolveSettings settings;
    double energy_drift = 0.0;
    double max_abs_u = 0.0;
    std::optional<DivergenceStudy> divergence;
    std::optional<FlatStudy> flat;
};

/// Serializers. JSON numbers round-trip exactly; non-finite values are written
/// as the strings "inf", "-inf" or "nan". CSV floats use 17 significant digits.
/// Column layouts are listed in docs/csv_schema.md.

std::string certification_json(const CertificationReport& report);
std::string scan_json(const AlphaScanResult& scan);
std::string margins_csv(const std::vector<CertificationReport>& reports);
std::string profile_csv(const std::vector<ProfileRow>& rows, double alpha);

std::string constants_json(const std::vector<BestConstantReport>& reports);
std::string constants_csv(const std::vector<BestConstantReport>& reports);

std::string energy_csv(const FieldHistory& hist);
std::string divergence_csv(const DivergenceStudy& study);
std::string flat_csv(const FlatStudy& study);
std::string evolve_json(const EvolveSummary& summary);

std::string theorem1_json(const Theorem1Record& record);
std::string theorem1_csv(const Theorem1Record& record);

/// Writes text to dir/name, creating dir first.
void write_file(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace morawetz
