#include "morawetz/config.hpp"

#include "json.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace morawetz {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    const std::string name = where + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError(name + ": expected a boolean");
        out = it->template get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError(name + ": expected a string");
        out = it->template get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError(name + ": expected a number");
        out = it->template get<T>();
    } else {
        if (!it->is_number_integer()) throw ConfigError(name + ": expected an integer");
        if (std::is_unsigned_v<T> && it->template get<long long>() < 0) throw ConfigError(name + ": must be nonnegative");
        out = it->template get<T>();
    }
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

void read_region(const json& obj, const std::string& where, TrapezoidRegion& r) {
    only_keys(obj, where, {"t1", "t2", "r1", "r2"});
    read(obj, "t1", where, r.t1);
    read(obj, "t2", where, r.t2);
    read(obj, "r1", where, r.r1);
    read(obj, "r2", where, r.r2);
    require(r.t1 < r.t2 && r.r1 < r.r2, where + ": need t1 < t2 and r1 < r2");
}

void read_bump(const json& obj, const std::string& where, BumpData& b) {
    only_keys(obj, where, {"center", "width", "amplitude", "velocity"});
    read(obj, "center", where, b.center);
    read(obj, "width", where, b.width);
    read(obj, "amplitude", where, b.amplitude);
    read(obj, "velocity", where, b.velocity);
    require(b.width > 0.0, where + ".width must be positive");
}

}  // namespace

Config parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    Config cfg;
    only_keys(root, "config",
              {"mass", "alpha", "output_dir", "threads", "scan", "verifier", "constants", "evolve", "ensemble"});
    read(root, "mass", "config", cfg.mass);
    require(cfg.mass > 0.0, "config.mass must be positive");
    if (root.contains("alpha") && !root["alpha"].is_null()) {
        double a = 0.0;
        read(root, "alpha", "config", a);
        require(a > 0.0, "config.alpha must be positive");
        cfg.alpha = a;
    }
    read(root, "output_dir", "config", cfg.output_dir);
    read(root, "threads", "config", cfg.threads);

    if (root.contains("scan")) {
        const json& s = root["scan"];
        only_keys(s, "scan", {"alpha_min", "alpha_max", "per_decade", "exhaustive"});
        read(s, "alpha_min", "scan", cfg.scan.alpha_min);
        read(s, "alpha_max", "scan", cfg.scan.alpha_max);
        read(s, "per_decade", "scan", cfg.scan.per_decade);
        read(s, "exhaustive", "scan", cfg.scan_exhaustive);
        require(cfg.scan.alpha_min > 0.0 && cfg.scan.alpha_max >= cfg.scan.alpha_min && cfg.scan.per_decade >= 1,
                "scan: need 0 < alpha_min <= alpha_max and per_decade >= 1");
    }
    if (root.contains("verifier")) {
        const json& v = root["verifier"];
        only_keys(v, "verifier",
                  {"rstar_min", "r_max", "split_radius", "grid_points", "refinements", "stability_tolerance",
                   "identity_tolerance", "focus_levels"});
        VerifierConfig& vc = cfg.verifier;
        read(v, "rstar_min", "verifier", vc.rstar_min);
        read(v, "r_max", "verifier", vc.r_max);
        read(v, "split_radius", "verifier", vc.split_radius);
        read(v, "grid_points", "verifier", vc.grid_points);
        read(v, "refinements", "verifier", vc.refinements);
        read(v, "stability_tolerance", "verifier", vc.stability_tolerance);
        read(v, "identity_tolerance", "verifier", vc.identity_tolerance);
        read(v, "focus_levels", "verifier", vc.focus_levels);
        require(vc.rstar_min < 0.0 && vc.r_max >= 1e4 && vc.split_radius > 3.0, "verifier: bad radial range");
        require(vc.grid_points >= 16 && vc.refinements >= 1 && vc.focus_levels >= 0, "verifier: bad grid size");
    }
    if (root.contains("constants")) {
        const json& c = root["constants"];
        only_keys(c, "constants",
                  {"ell_min", "ell_max", "include_limit", "rstar_min", "r_max", "grid_points", "validation_samples",
                   "seed", "focus_levels", "prop2", "prop3"});
        ConstantsConfig& cc = cfg.constants;
        read(c, "ell_min", "constants", cc.ell_min);
        read(c, "ell_max", "constants", cc.ell_max);
        read(c, "include_limit", "constants", cc.include_limit);
        read(c, "rstar_min", "constants", cc.rstar_min);
        read(c, "r_max", "constants", cc.r_max);
        read(c, "grid_points", "constants", cc.grid_points);
        read(c, "validation_samples", "constants", cc.validation_samples);
        read(c, "seed", "constants", cc.seed);
        read(c, "focus_levels", "constants", cc.focus_levels);
        read(c, "prop2", "constants", cfg.constants_prop2);
        read(c, "prop3", "constants", cfg.constants_prop3);
        require(cc.ell_min >= 0 && cc.ell_max >= cc.ell_min, "constants: empty ell range");
        require(cc.grid_points >= 16 && cc.validation_samples >= 0, "constants: bad sample counts");
    }
    if (root.contains("evolve")) {
        const json& e = root["evolve"];
        only_keys(e, "evolve",
                  {"ell", "flat", "rstar_min", "rstar_max", "h", "courant", "t_final", "bump", "region", "levels"});
        EvolveSettings& es = cfg.evolve;
        read(e, "ell", "evolve", es.ell);
        read(e, "flat", "evolve", es.flat);
        read(e, "rstar_min", "evolve", es.rstar_min);
        read(e, "rstar_max", "evolve", es.rstar_max);
        read(e, "h", "evolve", es.h);
        read(e, "courant", "evolve", es.courant);
        read(e, "t_final", "evolve", es.t_final);
        read(e, "levels", "evolve", es.levels);
        if (e.contains("bump")) read_bump(e["bump"], "evolve.bump", es.bump);
        if (e.contains("region")) read_region(e["region"], "evolve.region", es.region);
        require(es.ell >= 0 && es.h > 0.0 && es.courant > 0.0 && es.courant <= 1.0 && es.levels >= 1,
                "evolve: need ell >= 0, h > 0, 0 < courant <= 1, levels >= 1");
        require(es.rstar_max > es.rstar_min && es.t_final > 0.0, "evolve: empty domain or duration");
        require(!es.flat || es.ell == 0, "evolve: flat runs need ell = 0");
    }
    if (root.contains("ensemble")) {
        const json& e = root["ensemble"];
        only_keys(e, "ensemble",
                  {"runs", "ell_max", "seed", "h", "courant", "region", "padding", "center_spread", "width_min",
                   "width_max", "time_shift", "refine", "shift"});
        EnsembleConfig& ec = cfg.ensemble;
        read(e, "runs", "ensemble", ec.runs);
        read(e, "ell_max", "ensemble", ec.ell_max);
        read(e, "seed", "ensemble", ec.seed);
        read(e, "h", "ensemble", ec.h);
        read(e, "courant", "ensemble", ec.courant);
        read(e, "padding", "ensemble", ec.padding);
        read(e, "center_spread", "ensemble", ec.center_spread);
        read(e, "width_min", "ensemble", ec.width_min);
        read(e, "width_max", "ensemble", ec.width_max);
        read(e, "time_shift", "ensemble", ec.time_shift);
        read(e, "refine", "ensemble", ec.refine);
        read(e, "shift", "ensemble", ec.shift);
        if (e.contains("region")) read_region(e["region"], "ensemble.region", ec.region);
        require(ec.runs >= 1 && ec.ell_max >= 0, "ensemble: need runs >= 1 and ell_max >= 0");
        require(ec.h > 0.0 && ec.courant > 0.0 && ec.courant <= 1.0, "ensemble: need h > 0 and 0 < courant <= 1");
        require(ec.width_min > 0.0 && ec.width_max >= ec.width_min && ec.padding >= 0.0,
                "ensemble: bad bump widths or padding");
    }
    cfg.ensemble.mass = cfg.mass;
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

void apply_seed(Config& cfg, std::uint64_t seed) {
    cfg.constants.seed = seed;
    cfg.ensemble.seed = seed;
}

}  // namespace morawetz
