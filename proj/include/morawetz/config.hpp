#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "morawetz/rw_solver.hpp"
#include "morawetz/verifier.hpp"

namespace morawetz {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Single evolution driven by `morawetz evolve`.
struct EvolveSettings {
    int ell = 2;
    bool flat = false;  ///< mass 0, ell 0 pulse checked against its exact translate
    double rstar_min = -60.0;
    double rstar_max = 60.0;
    double h = 0.2;
    double courant = 0.5;
    double t_final = 20.0;
    BumpData bump{0.0, 4.0, 1.0, 1.0};
    TrapezoidRegion region{0.0, 20.0, -5.0, 5.0};
    int levels = 3;  ///< resolutions h, h/2, ... for the convergence tables
};

struct Config {
    double mass = 1.0;
    std::optional<double> alpha;
    std::string output_dir = "morawetz-out";
    unsigned threads = 0;
    AlphaScanConfig scan;
    bool scan_exhaustive = true;
    VerifierConfig verifier;
    ConstantsConfig constants;
    bool constants_prop2 = true;
    bool constants_prop3 = true;
    EvolveSettings evolve;
    EnsembleConfig ensemble;
};

/// Parses JSON text. Unknown keys, wrong types and out-of-range values raise ConfigError.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

/// Applies --seed to every seeded block.
void apply_seed(Config& cfg, std::uint64_t seed);

}  // namespace morawetz
