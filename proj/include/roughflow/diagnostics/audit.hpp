#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughflow/core/errors.hpp"
#include "roughflow/fluid/models2d.hpp"

namespace roughflow {

// Named scalar channels sampled on a shared time axis, the standard shape
// for run diagnostics (energy, enstrophy, circulation, residuals, ...).
struct InvariantSeries {
    std::vector<double> t;
    std::vector<std::string> names;
    std::vector<std::vector<double>> channels; // one inner vector per name

    std::size_t channel_index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw ConfigError("invariant series: no channel named " + name);
    }

    void append(double time, const std::vector<double>& row) {
        if (row.size() != names.size())
            throw ConfigError("invariant series: row width does not match channels");
        t.push_back(time);
        if (channels.size() != names.size()) channels.resize(names.size());
        for (std::size_t i = 0; i < row.size(); ++i) channels[i].push_back(row[i]);
    }

    void validate() const {
        if (channels.size() != names.size())
            throw ConfigError("invariant series: channel count mismatch");
        for (const auto& ch : channels) {
            if (ch.size() != t.size())
                throw ConfigError("invariant series: ragged channel lengths");
            for (double v : ch)
                if (!std::isfinite(v))
                    throw ConfigError("invariant series: non-finite sample");
        }
    }
};

// The vorticity moments the transport structure conserves, measured by the
// same quadratures the stepping code reports, so the audit and the run
// series can never drift apart.
struct VorticityMoments {
    double enstrophy = 0.0; // integral of w^2
    double casimir4 = 0.0;  // integral of w^4
    double total = 0.0;     // integral of w
};

inline VorticityMoments enstrophy_casimirs(Spectral2D& sp, const std::vector<double>& omega) {
    const double two_pi = 2.0 * std::acos(-1.0);
    auto inv = measure_invariants_2d(sp, omega, 0.0);
    return {inv.enstrophy, inv.casimir4, inv.mean_omega * two_pi * two_pi};
}

// One line of the conservation report: how far a channel wandered from its
// initial value over the run, and whether that stayed within tolerance.
struct InvariantAudit {
    std::string name;
    double initial = 0.0;
    double final_value = 0.0;
    double max_abs_drift = 0.0;
    double relative_drift = 0.0;
    bool pass = false;
};

inline InvariantAudit audit_channel(const InvariantSeries& series, const std::string& name,
                                    double relative_tolerance) {
    const auto& ch = series.channels[series.channel_index(name)];
    if (ch.empty()) throw ConfigError("invariant audit: empty channel " + name);
    InvariantAudit a;
    a.name = name;
    a.initial = ch.front();
    a.final_value = ch.back();
    for (double v : ch) a.max_abs_drift = std::max(a.max_abs_drift, std::abs(v - a.initial));
    double scale = std::max(std::abs(a.initial), 1e-12);
    a.relative_drift = a.max_abs_drift / scale;
    a.pass = a.relative_drift <= relative_tolerance;
    return a;
}

inline std::vector<InvariantAudit> audit_series(
    const InvariantSeries& series, const std::map<std::string, double>& tolerances) {
    series.validate();
    std::vector<InvariantAudit> out;
    for (const auto& [name, tol] : tolerances) out.push_back(audit_channel(series, name, tol));
    return out;
}

inline nlohmann::json audit_to_json(const std::vector<InvariantAudit>& audits) {
    nlohmann::json j = nlohmann::json::object();
    bool all = true;
    for (const auto& a : audits) {
        j["invariants"][a.name] = {{"initial", a.initial},
                                   {"final", a.final_value},
                                   {"max_abs_drift", a.max_abs_drift},
                                   {"relative_drift", a.relative_drift},
                                   {"pass", a.pass}};
        all = all && a.pass;
    }
    j["pass"] = all;
    return j;
}

} // namespace roughflow
