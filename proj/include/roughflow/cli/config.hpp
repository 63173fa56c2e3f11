#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughflow/core/errors.hpp"
#include "roughflow/core/gaussian.hpp"
#include "roughflow/flow/rde.hpp"

namespace roughflow {

enum class Scenario { lift, rde, burgers, camassa_holm, euler2d, wong_zakai, audit };

inline const std::vector<std::pair<std::string, Scenario>>& scenario_table() {
    static const std::vector<std::pair<std::string, Scenario>> table = {
        {"lift", Scenario::lift},
        {"rde", Scenario::rde},
        {"burgers", Scenario::burgers},
        {"camassa_holm", Scenario::camassa_holm},
        {"euler2d", Scenario::euler2d},
        {"wong_zakai", Scenario::wong_zakai},
        {"audit", Scenario::audit}};
    return table;
}

inline Scenario parse_scenario(const std::string& name) {
    for (const auto& [key, value] : scenario_table())
        if (key == name) return value;
    std::string known;
    for (const auto& [key, value] : scenario_table()) known += (known.empty() ? "" : ", ") + key;
    throw ConfigError("unknown scenario \"" + name + "\"; available: " + known);
}

inline std::string scenario_name(Scenario s) {
    for (const auto& [key, value] : scenario_table())
        if (value == s) return key;
    return "?";
}

struct DriverConfig {
    bool fbm = true;
    GaussianSpec spec;                    // fbm drivers
    std::vector<std::string> components;  // analytic drivers, expressions in t
    double alpha = 0.4;

    std::size_t dim() const { return fbm ? spec.dim : components.size(); }
};

struct GridConfig {
    std::size_t steps = 128;
    double t0 = 0.0;
    double t_final = 1.0;
    std::size_t n = 0;         // spatial resolution, PDE scenarios only
    std::size_t snapshots = 5; // field dumps, endpoints included
};

struct FieldConfig {
    std::string preset;
    std::string initial;                       // expression in x (1D) or x, y (2D)
    std::vector<std::vector<std::string>> xi;  // K entries; 1 (1D) or 2 (2D) exprs each
    double alpha_ch = 1.0;
    bool assert_burgers_limit = false; // set by the ch_alpha0 preset
};

struct RdeConfig {
    std::size_t dim = 0;
    std::vector<double> initial;               // flat particle buffer
    std::vector<std::string> drift;            // expressions in t, x1..xd; may be empty
    std::vector<std::vector<std::string>> xi;  // K entries of dim expressions in x1..xd
    StepScheme scheme = StepScheme::davie;
};

struct AuditConfig {
    std::map<std::string, double> tolerances;
    bool circulation = false;
    double loop_cx = 0.0, loop_cy = 0.0, loop_radius = 1.0;
    std::size_t loop_points = 256;
    double circulation_tol = 1e-3;
    std::string input; // invariants CSV, audit scenario only
};

struct ExperimentConfig {
    Scenario scenario = Scenario::lift;
    DriverConfig driver;
    GridConfig grid;
    FieldConfig fields;
    RdeConfig rde;
    AuditConfig audit;
    std::size_t levels = 0;   // refinement/mollification levels; 0 means single run
    std::string target;       // wong_zakai: "rde" or "burgers"
    bool corrupted = true;    // wong_zakai: also run the corrupted-second-level compare
    std::string out;
    nlohmann::json echo;      // the file as given, for the manifest
};

namespace config_detail {

using nlohmann::json;

inline void expect_keys(const json& j, const std::string& where,
                        std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be a table");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) known = true;
        if (!known) throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
}

inline DriverConfig parse_driver(const json& j) {
    DriverConfig d;
    std::string kind = j.value("kind", "fbm");
    if (kind == "fbm") {
        expect_keys(j, "driver", {"kind", "hurst", "dim", "seed", "fine_resolution", "alpha"});
        d.fbm = true;
        d.spec.hurst = j.value("hurst", 0.5);
        d.spec.dim = j.value("dim", std::size_t{1});
        d.spec.seed = j.value("seed", std::uint64_t{1});
        d.spec.fine_resolution = j.value("fine_resolution", std::size_t{8});
        d.alpha = j.value("alpha", 0.4);
    } else if (kind == "analytic") {
        expect_keys(j, "driver", {"kind", "components", "alpha"});
        d.fbm = false;
        if (!j.contains("components") || !j["components"].is_array() ||
            j["components"].empty())
            throw ConfigError("analytic driver needs a nonempty components array");
        for (const auto& c : j["components"]) d.components.push_back(c.get<std::string>());
        d.alpha = j.value("alpha", 1.0);
    } else {
        throw ConfigError("driver kind must be \"fbm\" or \"analytic\", got \"" + kind + "\"");
    }
    return d;
}

inline GridConfig parse_grid(const json& j) {
    expect_keys(j, "grid", {"steps", "t0", "t_final", "n", "snapshots"});
    GridConfig g;
    g.steps = j.value("steps", std::size_t{128});
    g.t0 = j.value("t0", 0.0);
    g.t_final = j.value("t_final", 1.0);
    g.n = j.value("n", std::size_t{0});
    g.snapshots = j.value("snapshots", std::size_t{5});
    if (g.steps == 0) throw ConfigError("grid.steps must be positive");
    if (!(g.t_final > g.t0)) throw ConfigError("grid.t_final must exceed grid.t0");
    return g;
}

inline std::vector<std::vector<std::string>> parse_xi(const json& arr, std::size_t comps,
                                                      const std::string& where) {
    std::vector<std::vector<std::string>> out;
    if (!arr.is_array()) throw ConfigError(where + " must be an array");
    for (const auto& entry : arr) {
        std::vector<std::string> field;
        if (entry.is_string()) {
            field.push_back(entry.get<std::string>());
        } else if (entry.is_array()) {
            for (const auto& c : entry) field.push_back(c.get<std::string>());
        } else {
            throw ConfigError(where + " entries must be expressions or expression arrays");
        }
        if (field.size() != comps)
            throw ConfigError(where + " entries need " + std::to_string(comps) +
                              " component expression(s)");
        out.push_back(std::move(field));
    }
    return out;
}

inline void apply_preset(const std::string& name, Scenario scenario, FieldConfig& f) {
    if (name == "taylor_green") {
        if (scenario != Scenario::euler2d && scenario != Scenario::wong_zakai)
            throw ConfigError("preset taylor_green is a planar vorticity state");
        if (f.initial.empty()) f.initial = "2*cos(x)*cos(y)";
        return;
    }
    if (name == "burgers_sine") {
        if (f.initial.empty()) f.initial = "sin(x)";
        if (f.xi.empty()) f.xi = {{"0.1"}};
        return;
    }
    if (name == "ch_alpha0") {
        if (f.initial.empty()) f.initial = "sin(x)";
        if (f.xi.empty()) f.xi = {{"0.1"}};
        f.alpha_ch = 0.0;
        f.assert_burgers_limit = true;
        return;
    }
    throw ConfigError("unknown preset \"" + name +
                      "\"; available: burgers_sine, ch_alpha0, taylor_green");
}

inline FieldConfig parse_fields(const json& j, Scenario scenario, std::size_t xi_comps) {
    expect_keys(j, "fields", {"preset", "initial", "xi", "alpha_ch"});
    FieldConfig f;
    f.initial = j.value("initial", "");
    if (j.contains("xi")) f.xi = parse_xi(j["xi"], xi_comps, "fields.xi");
    if (j.contains("alpha_ch")) {
        f.alpha_ch = j["alpha_ch"].get<double>();
        if (f.alpha_ch < 0.0) throw ConfigError("fields.alpha_ch must be nonnegative");
    }
    if (j.contains("preset")) {
        f.preset = j["preset"].get<std::string>();
        apply_preset(f.preset, scenario, f);
    }
    return f;
}

inline RdeConfig parse_rde(const json& j) {
    expect_keys(j, "rde", {"dim", "initial", "drift", "xi", "scheme"});
    RdeConfig r;
    r.dim = j.value("dim", std::size_t{0});
    if (r.dim == 0) throw ConfigError("rde.dim must be positive");
    if (!j.contains("initial")) throw ConfigError("rde.initial is required");
    for (const auto& v : j["initial"]) r.initial.push_back(v.get<double>());
    if (r.initial.empty() || r.initial.size() % r.dim != 0)
        throw ConfigError("rde.initial must be a nonempty multiple of rde.dim");
    if (j.contains("drift")) {
        for (const auto& e : j["drift"]) r.drift.push_back(e.get<std::string>());
        if (r.drift.size() != r.dim)
            throw ConfigError("rde.drift needs one expression per coordinate");
    }
    if (j.contains("xi")) r.xi = parse_xi(j["xi"], r.dim, "rde.xi");
    std::string scheme = j.value("scheme", "davie");
    if (scheme == "davie")
        r.scheme = StepScheme::davie;
    else if (scheme == "magnus")
        r.scheme = StepScheme::magnus;
    else
        throw ConfigError("rde.scheme must be \"davie\" or \"magnus\"");
    return r;
}

inline AuditConfig parse_audit(const json& j) {
    expect_keys(j, "audit",
                {"tolerances", "circulation", "loop", "circulation_tol", "input"});
    AuditConfig a;
    if (j.contains("tolerances"))
        for (const auto& item : j["tolerances"].items())
            a.tolerances[item.key()] = item.value().get<double>();
    a.circulation = j.value("circulation", false);
    a.circulation_tol = j.value("circulation_tol", 1e-3);
    a.input = j.value("input", "");
    if (j.contains("loop")) {
        expect_keys(j["loop"], "audit.loop", {"cx", "cy", "radius", "points"});
        a.loop_cx = j["loop"].value("cx", 0.0);
        a.loop_cy = j["loop"].value("cy", 0.0);
        a.loop_radius = j["loop"].value("radius", 1.0);
        a.loop_points = j["loop"].value("points", std::size_t{256});
    }
    return a;
}

} // namespace config_detail

// Parse and structurally validate a config file.  Field and driver
// expressions are compiled later, by the runner, but every schema problem
// (unknown key, wrong shape, missing block) is rejected here.
inline ExperimentConfig parse_config_json(const nlohmann::json& doc,
                                          std::optional<Scenario> cli_scenario = {}) {
    using config_detail::expect_keys;
    try {
        expect_keys(doc, "config",
                    {"scenario", "seed", "out", "driver", "grid", "fields", "rde", "audit",
                     "levels", "target", "corrupted"});
        ExperimentConfig cfg;
        cfg.echo = doc;

        if (doc.contains("scenario")) {
            cfg.scenario = parse_scenario(doc["scenario"].get<std::string>());
            if (cli_scenario && *cli_scenario != cfg.scenario)
                throw ConfigError("config file says scenario \"" +
                                  scenario_name(cfg.scenario) +
                                  "\" but the command line asked for \"" +
                                  scenario_name(*cli_scenario) + "\"");
        } else if (cli_scenario) {
            cfg.scenario = *cli_scenario;
        } else {
            throw ConfigError("no scenario given on the command line or in the config");
        }

        if (doc.contains("driver")) cfg.driver = config_detail::parse_driver(doc["driver"]);
        if (doc.contains("grid")) cfg.grid = config_detail::parse_grid(doc["grid"]);
        if (doc.contains("rde")) cfg.rde = config_detail::parse_rde(doc["rde"]);
        if (doc.contains("audit")) cfg.audit = config_detail::parse_audit(doc["audit"]);
        if (doc.contains("fields")) {
            std::size_t comps = cfg.scenario == Scenario::euler2d ? 2 : 1;
            cfg.fields = config_detail::parse_fields(doc["fields"], cfg.scenario, comps);
        }
        cfg.levels = doc.value("levels", std::size_t{0});
        cfg.target = doc.value("target", "");
        cfg.corrupted = doc.value("corrupted", true);
        cfg.out = doc.value("out", "");
        if (doc.contains("seed")) {
            if (!cfg.driver.fbm)
                throw ConfigError("seed override only applies to fbm drivers");
            cfg.driver.spec.seed = doc["seed"].get<std::uint64_t>();
        }

        // scenario-level requirements
        switch (cfg.scenario) {
        case Scenario::lift:
            if (!doc.contains("driver")) throw ConfigError("lift needs a driver block");
            break;
        case Scenario::rde:
            if (!doc.contains("driver") || !doc.contains("rde"))
                throw ConfigError("rde needs driver and rde blocks");
            if (cfg.rde.xi.size() != cfg.driver.dim())
                throw ConfigError("rde.xi must have one field per driver component");
            break;
        case Scenario::burgers:
        case Scenario::camassa_holm:
            if (!doc.contains("driver") || !doc.contains("fields"))
                throw ConfigError(scenario_name(cfg.scenario) +
                                  " needs driver and fields blocks");
            if (cfg.fields.initial.empty())
                throw ConfigError("fields.initial (or a preset) is required");
            if (cfg.grid.n == 0) throw ConfigError("grid.n is required for PDE scenarios");
            if (!cfg.fields.xi.empty() && cfg.fields.xi.size() != cfg.driver.dim())
                throw ConfigError("fields.xi must have one field per driver component");
            break;
        case Scenario::euler2d:
            if (!doc.contains("driver") || !doc.contains("fields"))
                throw ConfigError("euler2d needs driver and fields blocks");
            if (cfg.fields.initial.empty())
                throw ConfigError("fields.initial (or a preset) is required");
            if (cfg.grid.n == 0) throw ConfigError("grid.n is required for PDE scenarios");
            if (!cfg.fields.xi.empty() && cfg.fields.xi.size() != cfg.driver.dim())
                throw ConfigError("fields.xi must have one field per driver component");
            break;
        case Scenario::wong_zakai:
            if (!cfg.driver.fbm)
                throw ConfigError("wong_zakai studies a fixed fbm realization");
            if (cfg.levels == 0) cfg.levels = 4;
            if (cfg.levels < 3) throw ConfigError("wong_zakai needs at least 3 levels");
            if (cfg.target == "rde") {
                if (!doc.contains("rde")) throw ConfigError("target rde needs an rde block");
                if (cfg.rde.xi.size() != cfg.driver.dim())
                    throw ConfigError("rde.xi must have one field per driver component");
            } else if (cfg.target == "burgers") {
                if (!doc.contains("fields") || cfg.fields.initial.empty())
                    throw ConfigError("target burgers needs a fields block with initial data");
                if (cfg.grid.n == 0) throw ConfigError("grid.n is required for PDE targets");
            } else {
                throw ConfigError("wong_zakai target must be \"rde\" or \"burgers\"");
            }
            break;
        case Scenario::audit:
            if (cfg.audit.input.empty())
                throw ConfigError("audit needs audit.input (an invariants CSV)");
            if (cfg.audit.tolerances.empty())
                throw ConfigError("audit needs audit.tolerances");
            break;
        }
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path,
                                    std::optional<Scenario> cli_scenario = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config_json(doc, cli_scenario);
}

} // namespace roughflow
