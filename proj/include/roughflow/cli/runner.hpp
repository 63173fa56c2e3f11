#pragma once

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "roughflow/cli/artifacts.hpp"
#include "roughflow/cli/config.hpp"
#include "roughflow/cli/expr.hpp"
#include "roughflow/core/gaussian.hpp"
#include "roughflow/core/lifts.hpp"
#include "roughflow/diagnostics/audit.hpp"
#include "roughflow/diagnostics/loops.hpp"
#include "roughflow/diagnostics/sampler.hpp"
#include "roughflow/diagnostics/wong_zakai.hpp"
#include "roughflow/fluid/models1d.hpp"
#include "roughflow/fluid/models2d.hpp"

namespace roughflow {

namespace run_detail {

namespace fs = std::filesystem;

inline GeometricRoughPath build_driver(const DriverConfig& d, const TimeGrid& grid) {
    if (d.fbm) return lift_gaussian(d.spec, grid, d.alpha);
    std::vector<CompiledExpr> comps;
    for (const auto& text : d.components)
        comps.emplace_back(text, std::vector<std::string>{"t"});
    auto value = [comps](double t, double* out) {
        for (std::size_t k = 0; k < comps.size(); ++k) out[k] = comps[k](&t);
    };
    return lift_sampled(value, comps.size(), grid, d.alpha);
}

// Dyadic step-refinement family sharing one underlying path.  Gaussian
// realizations are drawn once on the finest grid and Chen-coarsened, so
// every level discretizes the same rough path and only the solver step
// changes; analytic drivers are resampled, which converges to the same limit.
inline std::vector<GeometricRoughPath> build_driver_levels(const DriverConfig& d,
                                                           const GridConfig& g,
                                                           std::size_t levels,
                                                           std::size_t base_steps) {
    std::vector<GeometricRoughPath> out;
    if (d.fbm) {
        auto fine_grid = TimeGrid::uniform(g.t0, g.t_final, base_steps << (levels - 1));
        auto finest = lift_gaussian(d.spec, fine_grid, d.alpha);
        for (std::size_t j = 0; j < levels; ++j) {
            std::size_t stride = std::size_t{1} << (levels - 1 - j);
            out.push_back(stride == 1 ? finest : coarsen_stride(finest, stride));
        }
    } else {
        for (std::size_t j = 0; j < levels; ++j)
            out.push_back(
                build_driver(d, TimeGrid::uniform(g.t0, g.t_final, base_steps << j)));
    }
    return out;
}

inline std::vector<std::size_t> snapshot_indices(std::size_t steps, std::size_t want) {
    if (want < 2) want = 2;
    if (want > steps + 1) want = steps + 1;
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < want; ++j) {
        std::size_t idx = (j * steps + (want - 1) / 2) / (want - 1);
        if (out.empty() || idx != out.back()) out.push_back(idx);
    }
    if (out.back() != steps) out.push_back(steps);
    return out;
}

inline std::vector<double> sample_line(const CompiledExpr& e, std::size_t n) {
    const double two_pi = 2.0 * std::acos(-1.0);
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        double x = two_pi * static_cast<double>(j) / static_cast<double>(n);
        out[j] = e(&x);
    }
    return out;
}

inline std::vector<double> sample_plane(const CompiledExpr& e, std::size_t n) {
    const double two_pi = 2.0 * std::acos(-1.0);
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double args[2] = {two_pi * static_cast<double>(i) / static_cast<double>(n),
                              two_pi * static_cast<double>(j) / static_cast<double>(n)};
            out[i * n + j] = e(args);
        }
    return out;
}

inline RoughFieldSet1D build_fields_1d(const Spectral1D& sp, const FieldConfig& f) {
    std::vector<double> flat;
    for (const auto& entry : f.xi) {
        CompiledExpr e(entry.at(0), {"x"});
        auto vals = sample_line(e, sp.size());
        flat.insert(flat.end(), vals.begin(), vals.end());
    }
    return make_rough_fields_1d(sp, std::move(flat), f.xi.size());
}

inline RoughFieldSet2D build_fields_2d(const Spectral2D& sp, const FieldConfig& f) {
    std::vector<double> flat;
    for (const auto& entry : f.xi) {
        for (std::size_t axis = 0; axis < 2; ++axis) {
            CompiledExpr e(entry.at(axis), {"x", "y"});
            auto vals = sample_plane(e, sp.size());
            flat.insert(flat.end(), vals.begin(), vals.end());
        }
    }
    return make_rough_fields_2d(sp, std::move(flat), f.xi.size(), true);
}

inline VectorFieldFamily build_rde_family(const RdeConfig& r) {
    VectorFieldFamily f;
    f.dim = r.dim;
    f.num_rough = r.xi.size();

    std::vector<std::string> xvars;
    for (std::size_t a = 0; a < r.dim; ++a) xvars.push_back("x" + std::to_string(a + 1));

    if (!r.drift.empty()) {
        std::vector<std::string> tvars = xvars;
        tvars.insert(tvars.begin(), "t");
        std::vector<CompiledExpr> comps;
        for (const auto& text : r.drift) comps.emplace_back(text, tvars);
        f.drift = [comps, d = r.dim](double t, const double* x, double* out) {
            std::vector<double> args(d + 1);
            args[0] = t;
            for (std::size_t a = 0; a < d; ++a) args[a + 1] = x[a];
            for (std::size_t a = 0; a < d; ++a) out[a] = comps[a](args.data());
        };
    }

    std::vector<std::vector<CompiledExpr>> fields;
    for (const auto& entry : r.xi) {
        std::vector<CompiledExpr> comps;
        for (const auto& text : entry) comps.emplace_back(text, xvars);
        fields.push_back(std::move(comps));
    }
    f.rough = [fields](std::size_t k, const double* x, double* out) {
        const auto& comps = fields[k];
        for (std::size_t a = 0; a < comps.size(); ++a) out[a] = comps[a](x);
    };
    // jacobians fall back to central differences inside the family
    return f;
}

// 1D PDE run with full bookkeeping.  Aborts are caught and recorded so the
// partial invariant series still reaches the artifacts.
struct Pde1DOutcome {
    std::vector<double> u;
    InvariantSeries series;
    std::vector<std::pair<double, std::vector<double>>> snaps;
    StepMonitor monitor;
    bool aborted = false;
    std::string abort_message;
    double last_valid_time = 0.0;
};

inline Pde1DOutcome solve_pde_1d(Model1DKind kind, double alpha, const FieldConfig& fc,
                                 std::size_t n, const GeometricRoughPath& p,
                                 const std::vector<std::size_t>& snap_at) {
    Spectral1D sp(n);
    Pde1DOutcome out;
    out.series.names = {"mean_u", "energy", "momentum"};
    CompiledExpr init(fc.initial, {"x"});
    out.u = sp.filter(sample_line(init, n));
    auto fields = build_fields_1d(sp, fc);

    auto record = [&](std::size_t i) {
        double t = p.grid().t[i];
        auto inv = measure_invariants_1d(sp, out.u, alpha, t);
        out.series.append(t, {inv.mean_u, inv.energy, inv.momentum_integral});
        for (std::size_t idx : snap_at)
            if (idx == i) out.snaps.emplace_back(t, out.u);
    };

    record(0);
    try {
        for (std::size_t i = 0; i + 1 < p.points(); ++i) {
            step_rough_pde(sp, out.u, kind, alpha, fields, p, i, {}, &out.monitor);
            record(i + 1);
        }
    } catch (const NumericalAbort& e) {
        out.aborted = true;
        out.abort_message = e.what();
        out.last_valid_time = e.last_valid_time;
    }
    return out;
}

struct Pde2DOutcome {
    std::vector<double> omega;
    InvariantSeries series;
    std::vector<std::pair<double, std::vector<double>>> snaps;
    StepMonitor monitor;
    VelocityHistory history; // populated when keep_history is requested
    bool aborted = false;
    std::string abort_message;
    double last_valid_time = 0.0;
};

inline Pde2DOutcome solve_pde_2d(const FieldConfig& fc, std::size_t n,
                                 const GeometricRoughPath& p,
                                 const std::vector<std::size_t>& snap_at,
                                 bool keep_history) {
    Spectral2D sp(n);
    Pde2DOutcome out;
    out.series.names = {"energy", "enstrophy", "casimir4", "mean_omega"};
    CompiledExpr init(fc.initial, {"x", "y"});
    out.omega = sp.filter(sample_plane(init, n));
    auto fields = build_fields_2d(sp, fc);

    auto record = [&](std::size_t i) {
        double t = p.grid().t[i];
        auto inv = measure_invariants_2d(sp, out.omega, t);
        out.series.append(t, {inv.energy, inv.enstrophy, inv.casimir4, inv.mean_omega});
        if (keep_history) out.history.record(sp, out.omega, t);
        for (std::size_t idx : snap_at)
            if (idx == i) out.snaps.emplace_back(t, out.omega);
    };

    record(0);
    try {
        for (std::size_t i = 0; i + 1 < p.points(); ++i) {
            step_rough_pde(sp, out.omega, fields, p, i, {}, &out.monitor);
            record(i + 1);
        }
    } catch (const NumericalAbort& e) {
        out.aborted = true;
        out.abort_message = e.what();
        out.last_valid_time = e.last_valid_time;
    }
    return out;
}

inline void write_series_csv(const fs::path& dir, const std::string& name,
                             const InvariantSeries& series, RunManifest& man) {
    std::vector<std::string> header = {"t"};
    header.insert(header.end(), series.names.begin(), series.names.end());
    CsvWriter csv(dir / name, header);
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        std::vector<double> row = {series.t[i]};
        for (const auto& ch : series.channels) row.push_back(ch[i]);
        csv.row(row);
    }
    csv.close();
    man.add_file(dir, name);
}

inline void write_snapshots_1d(const fs::path& dir, const std::string& name,
                               const std::vector<std::pair<double, std::vector<double>>>& snaps,
                               RunManifest& man) {
    const double two_pi = 2.0 * std::acos(-1.0);
    CsvWriter csv(dir / name, {"t", "x", "u"});
    for (const auto& [t, u] : snaps) {
        const std::size_t n = u.size();
        for (std::size_t j = 0; j < n; ++j)
            csv.row({t, two_pi * static_cast<double>(j) / static_cast<double>(n), u[j]});
    }
    csv.close();
    man.add_file(dir, name);
}

inline void write_snapshots_2d(const fs::path& dir, const std::string& name,
                               const std::vector<std::pair<double, std::vector<double>>>& snaps,
                               RunManifest& man) {
    const double two_pi = 2.0 * std::acos(-1.0);
    CsvWriter csv(dir / name, {"t", "x", "y", "omega"});
    for (const auto& [t, w] : snaps) {
        const auto n = static_cast<std::size_t>(std::lround(std::sqrt(double(w.size()))));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                csv.row({t, two_pi * static_cast<double>(i) / static_cast<double>(n),
                         two_pi * static_cast<double>(j) / static_cast<double>(n),
                         w[i * n + j]});
    }
    csv.close();
    man.add_file(dir, name);
}

inline void note_monitor(RunManifest& man, const StepMonitor& mon) {
    man.residuals["max_cfl"] = mon.max_cfl;
    man.residuals["max_rough_intensity"] = mon.max_rough;
    man.residuals["max_tail_fraction"] = mon.max_tail_fraction;
    man.residuals["tail_warning"] = mon.tail_warning;
}

inline int note_abort(RunManifest& man, const std::string& message, double last_valid) {
    man.status = "aborted";
    man.residuals["abort_message"] = message;
    man.residuals["last_valid_time"] = last_valid;
    return 3;
}

// ---------------------------------------------------------------- scenarios
//
// Each runner writes its artifacts into dir, fills the manifest, and returns
// the process exit code.  The comparable end-of-run state, used by dyadic
// refinement studies, lands in *state when requested.

inline int run_lift(const ExperimentConfig&, const GeometricRoughPath& p, const fs::path& dir,
                    RunManifest& man, std::vector<double>* state) {
    const std::size_t K = p.dim();

    std::vector<std::string> header = {"t"};
    for (std::size_t k = 0; k < K; ++k) header.push_back("z_" + std::to_string(k + 1));
    CsvWriter driver_csv(dir / "driver.csv", header);
    for (std::size_t i = 0; i < p.points(); ++i) {
        std::vector<double> row = {p.grid().t[i]};
        for (std::size_t k = 0; k < K; ++k) row.push_back(p.value(i, k));
        driver_csv.row(row);
    }
    driver_csv.close();
    man.add_file(dir, "driver.csv");

    header = {"t_start", "t_end"};
    for (std::size_t l = 0; l < K; ++l)
        for (std::size_t k = 0; k < K; ++k)
            header.push_back("zz_" + std::to_string(l + 1) + "_" + std::to_string(k + 1));
    CsvWriter level2_csv(dir / "second_level.csv", header);
    std::vector<double> zz(K * K);
    for (std::size_t i = 0; i + 1 < p.points(); ++i) {
        p.second_level(i, i + 1, zz.data());
        std::vector<double> row = {p.grid().t[i], p.grid().t[i + 1]};
        row.insert(row.end(), zz.begin(), zz.end());
        level2_csv.row(row);
    }
    level2_csv.close();
    man.add_file(dir, "second_level.csv");

    man.residuals["chen_residual"] = p.chen_residual();
    man.residuals["geometricity_residual"] = p.geometricity_residual();

    if (state) {
        state->assign(K + K * K, 0.0);
        p.increment(0, p.points() - 1, state->data());
        p.second_level(0, p.points() - 1, state->data() + K);
    }
    return 0;
}

inline int run_rde(const ExperimentConfig& cfg,
                   std::shared_ptr<const GeometricRoughPath> path, const fs::path& dir,
                   RunManifest& man, std::vector<double>* state) {
    auto family = build_rde_family(cfg.rde);
    FlowMap flow;
    try {
        flow = solve_flow(family, path, cfg.rde.initial, cfg.rde.scheme);
    } catch (const NumericalAbort& e) {
        return note_abort(man, e.what(), e.last_valid_time);
    }

    std::vector<std::string> header = {"particle_id", "t"};
    for (std::size_t a = 0; a < cfg.rde.dim; ++a)
        header.push_back("x_" + std::to_string(a + 1));
    CsvWriter csv(dir / "trajectory.csv", header);
    for (std::size_t m = 0; m < flow.num_particles; ++m)
        for (std::size_t i = 0; i < path->points(); ++i) {
            std::vector<double> row = {path->grid().t[i]};
            const double* x = flow.position(i, m);
            row.insert(row.end(), x, x + cfg.rde.dim);
            csv.row(m, row);
        }
    csv.close();
    man.add_file(dir, "trajectory.csv");

    man.residuals["chen_residual"] = path->chen_residual();
    man.residuals["geometricity_residual"] = path->geometricity_residual();
    if (path->points() >= 3) {
        std::size_t mid = (path->points() - 1) / 2;
        man.residuals["composition_residual"] = flow_composition_residual(
            flow, 0, mid, path->points() - 1, cfg.rde.initial);
    }

    if (state) {
        const double* last = flow.position(path->points() - 1, 0);
        state->assign(last, last + flow.num_particles * cfg.rde.dim);
    }
    return 0;
}

inline int run_pde_1d(const ExperimentConfig& cfg, const GeometricRoughPath& p,
                      const fs::path& dir, RunManifest& man, std::vector<double>* state) {
    auto kind = cfg.scenario == Scenario::burgers ? Model1DKind::burgers
                                                  : Model1DKind::camassa_holm;
    double alpha = kind == Model1DKind::burgers ? 0.0 : cfg.fields.alpha_ch;
    auto snap_at = snapshot_indices(p.intervals(), cfg.grid.snapshots);

    auto out = solve_pde_1d(kind, alpha, cfg.fields, cfg.grid.n, p, snap_at);
    write_series_csv(dir, "invariants.csv", out.series, man);
    write_snapshots_1d(dir, "solution.csv", out.snaps, man);
    note_monitor(man, out.monitor);
    if (out.aborted) return note_abort(man, out.abort_message, out.last_valid_time);

    if (cfg.fields.assert_burgers_limit) {
        // the ch_alpha0 preset promises agreement with the plain 1D model
        auto twin = solve_pde_1d(Model1DKind::burgers, 0.0, cfg.fields, cfg.grid.n, p, {});
        double gap = 0.0;
        for (std::size_t j = 0; j < out.u.size(); ++j)
            gap = std::max(gap, std::abs(out.u[j] - twin.u[j]));
        man.residuals["burgers_equivalence_gap"] = gap;
        if (twin.aborted || gap > 1e-10)
            return note_abort(man, "alpha = 0 run does not match the plain 1D model", 0.0);
    }

    if (state) *state = out.u;
    return 0;
}

inline int run_euler2d(const ExperimentConfig& cfg,
                       std::shared_ptr<const GeometricRoughPath> path, const fs::path& dir,
                       RunManifest& man, std::vector<double>* state) {
    auto snap_at = snapshot_indices(path->intervals(), cfg.grid.snapshots);
    const bool want_loop = cfg.audit.circulation;

    auto out = solve_pde_2d(cfg.fields, cfg.grid.n, *path, snap_at, want_loop);
    write_series_csv(dir, "invariants.csv", out.series, man);
    write_snapshots_2d(dir, "omega.csv", out.snaps, man);
    note_monitor(man, out.monitor);

    if (!cfg.audit.tolerances.empty()) {
        auto audits = audit_series(out.series, cfg.audit.tolerances);
        auto doc = audit_to_json(audits);
        std::ofstream js(dir / "audit.json", std::ios::binary);
        if (!js) throw IoError("cannot create audit.json");
        js << doc.dump(2) << "\n";
        js.close();
        man.add_file(dir, "audit.json");
        man.residuals["audit_pass"] = doc["pass"].get<bool>();
    }

    if (out.aborted) return note_abort(man, out.abort_message, out.last_valid_time);

    if (want_loop) {
        Spectral2D sp(cfg.grid.n);
        // a deterministic run still advects the loop; give it zero noise
        // fields so the particle step sees one field per driver component
        auto fc = cfg.fields;
        if (fc.xi.empty())
            fc.xi.assign(path->dim(), std::vector<std::string>{"0", "0"});
        auto fields = build_fields_2d(sp, fc);
        auto family = advection_family(out.history, sp, fields);
        auto loop = circle_loop(cfg.audit.loop_cx, cfg.audit.loop_cy, cfg.audit.loop_radius,
                                cfg.audit.loop_points);
        auto flow = advect_loop(loop, family, path);
        auto series = circulation_series(flow, out.history);
        CsvWriter csv(dir / "circulation.csv", {"t", "circulation"});
        for (std::size_t i = 0; i < series.size(); ++i)
            csv.row({path->grid().t[i], series[i]});
        csv.close();
        man.add_file(dir, "circulation.csv");

        double drift = 0.0;
        for (double c : series) drift = std::max(drift, std::abs(c - series[0]));
        double scale = std::max(std::abs(series[0]), 1e-12);
        man.residuals["circulation_relative_drift"] = drift / scale;
        man.residuals["circulation_pass"] = (drift / scale) <= cfg.audit.circulation_tol;
    }

    if (state) *state = out.omega;
    return 0;
}

// Dispatch for the scenarios a refinement study can drive.
inline int run_single(const ExperimentConfig& cfg, const GeometricRoughPath& path,
                      const fs::path& dir, RunManifest& man, std::vector<double>* state) {
    switch (cfg.scenario) {
    case Scenario::lift:
        return run_lift(cfg, path, dir, man, state);
    case Scenario::rde:
        return run_rde(cfg, std::make_shared<const GeometricRoughPath>(path), dir, man,
                       state);
    case Scenario::burgers:
    case Scenario::camassa_holm:
        return run_pde_1d(cfg, path, dir, man, state);
    case Scenario::euler2d:
        return run_euler2d(cfg, std::make_shared<const GeometricRoughPath>(path), dir, man,
                           state);
    default:
        throw ConfigError("refinement studies cover lift, rde, and the PDE scenarios");
    }
}

inline int run_wong_zakai(const ExperimentConfig& cfg, const fs::path& dir,
                          RunManifest& man) {
    auto grid = TimeGrid::uniform(cfg.grid.t0, cfg.grid.t_final, cfg.grid.steps);
    auto levels = lift_gaussian_levels(cfg.driver.spec, grid, cfg.levels, cfg.driver.alpha);

    std::function<std::vector<double>(const GeometricRoughPath&)> solve;
    if (cfg.target == "rde") {
        auto family = build_rde_family(cfg.rde);
        auto initial = cfg.rde.initial;
        auto scheme = cfg.rde.scheme;
        auto dim = cfg.rde.dim;
        solve = [family, initial, scheme, dim](const GeometricRoughPath& p) {
            auto flow = solve_flow(family, std::make_shared<const GeometricRoughPath>(p),
                                   initial, scheme);
            const double* last = flow.position(p.points() - 1, 0);
            return std::vector<double>(last, last + flow.num_particles * dim);
        };
    } else {
        auto fc = cfg.fields;
        auto n = cfg.grid.n;
        solve = [fc, n](const GeometricRoughPath& p) {
            auto out = solve_pde_1d(Model1DKind::burgers, 0.0, fc, n, p, {});
            if (out.aborted)
                throw NumericalAbort("mollification level aborted: " + out.abort_message,
                                     out.last_valid_time);
            return out.u;
        };
    }

    WongZakaiReport report;
    double corrupted_gap = 0.0;
    try {
        report = wong_zakai_report(levels, solve);
        if (cfg.corrupted) {
            auto broken = solve(antisymmetrize_second_level(levels.back()));
            corrupted_gap = solution_distance(broken, solve(levels.back()));
        }
    } catch (const NumericalAbort& e) {
        return note_abort(man, e.what(), e.last_valid_time);
    }

    CsvWriter csv(dir / "wong_zakai.csv",
                  {"level", "resolution", "successive_distance", "distance_to_finest"});
    for (std::size_t j = 0; j + 1 < cfg.levels; ++j)
        csv.row(j, {static_cast<double>(cfg.driver.spec.fine_resolution << j),
                    report.successive[j], report.to_finest[j]});
    csv.close();
    man.add_file(dir, "wong_zakai.csv");

    man.residuals["monotone"] = report.monotone;
    man.residuals["finest_successive_distance"] = report.successive.back();
    if (cfg.corrupted) man.residuals["corrupted_gap"] = corrupted_gap;
    return 0;
}

inline InvariantSeries read_invariants_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty invariants file " + path.string());
    InvariantSeries series;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) comma = line.size();
        cols.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (cols.size() < 2 || cols[0] != "t")
        throw ConfigError("invariants file must start with a t column");
    series.names.assign(cols.begin() + 1, cols.end());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        const char* s = line.c_str();
        char* end = nullptr;
        while (true) {
            row.push_back(std::strtod(s, &end));
            if (s == end) throw ConfigError("malformed row in " + path.string());
            if (*end != ',') break;
            s = end + 1;
        }
        if (row.size() != cols.size()) throw ConfigError("ragged row in " + path.string());
        series.append(row[0], std::vector<double>(row.begin() + 1, row.end()));
    }
    series.validate();
    return series;
}

inline int run_audit(const ExperimentConfig& cfg, const fs::path& dir, RunManifest& man) {
    auto series = read_invariants_csv(cfg.audit.input);
    auto audits = audit_series(series, cfg.audit.tolerances);
    auto doc = audit_to_json(audits);
    std::ofstream js(dir / "audit.json", std::ios::binary);
    if (!js) throw IoError("cannot create audit.json");
    js << doc.dump(2) << "\n";
    js.close();
    man.add_file(dir, "audit.json");
    bool pass = doc["pass"].get<bool>();
    man.residuals["audit_pass"] = pass;
    if (!pass) man.status = "failed";
    return pass ? 0 : 3;
}

// ------------------------------------------------------------------ studies

struct FitResult {
    double order = 0.0;
    double r_squared = 0.0;
    bool valid = false;
};

inline FitResult fit_order(const std::vector<double>& mesh, const std::vector<double>& err) {
    FitResult fit;
    std::size_t n = mesh.size();
    if (n < 2) return fit;
    for (double e : err)
        if (!(e > 0.0)) return fit; // exact agreement: no slope to fit
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::log(mesh[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) return fit;
    fit.order = (n * sxy - sx * sy) / denom;
    double intercept = (sy - fit.order * sx) / n;
    double ss_res = 0, ss_tot = 0, mean = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        double y = std::log(err[i]);
        double yhat = fit.order * std::log(mesh[i]) + intercept;
        ss_res += (y - yhat) * (y - yhat);
        ss_tot += (y - mean) * (y - mean);
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.valid = true;
    return fit;
}

inline int run_study(const ExperimentConfig& cfg, const fs::path& dir, RunManifest& man) {
    const std::size_t L = cfg.levels;
    if (L < 3) throw ConfigError("refinement studies need at least 3 levels");

    auto paths = build_driver_levels(cfg.driver, cfg.grid, L, cfg.grid.steps);

    struct LevelOutput {
        std::vector<double> state;
        RunManifest manifest;
        int code = 0;
    };
    std::vector<std::future<LevelOutput>> jobs;
    std::vector<fs::path> subdirs;
    for (std::size_t j = 0; j < L; ++j) {
        fs::path sub = dir / ("level_" + std::to_string(j));
        std::error_code ec;
        fs::create_directories(sub, ec);
        if (ec) throw IoError("cannot create " + sub.string());
        subdirs.push_back(sub);
        const GeometricRoughPath* path = &paths[j];
        jobs.push_back(std::async(std::launch::async, [&cfg, path, sub, j]() {
            LevelOutput out;
            out.manifest.scenario = scenario_name(cfg.scenario);
            out.manifest.config_echo = cfg.echo;
            out.manifest.residuals["study_level"] = j;
            out.manifest.residuals["steps"] = path->intervals();
            WallClock clock;
            out.code = run_single(cfg, *path, sub, out.manifest, &out.state);
            out.manifest.wall_seconds = clock.seconds();
            return out;
        }));
    }

    std::vector<std::vector<double>> states;
    int worst = 0;
    std::string first_abort;
    for (std::size_t j = 0; j < L; ++j) {
        auto out = jobs[j].get();
        out.manifest.write(subdirs[j]);
        if (out.code != 0 && worst == 0) {
            worst = out.code;
            first_abort = "study level " + std::to_string(j) + " aborted";
        }
        states.push_back(std::move(out.state));
    }
    if (worst != 0) return note_abort(man, first_abort, 0.0);

    std::vector<double> mesh, to_finest, successive;
    const double span = cfg.grid.t_final - cfg.grid.t0;
    for (std::size_t j = 0; j < L; ++j)
        mesh.push_back(span / static_cast<double>(cfg.grid.steps << j));
    for (std::size_t j = 0; j + 1 < L; ++j) {
        to_finest.push_back(solution_distance(states[j], states.back()));
        successive.push_back(solution_distance(states[j], states[j + 1]));
    }

    CsvWriter csv(dir / "study.csv",
                  {"level", "steps", "mesh", "distance_to_finest", "successive_distance"});
    for (std::size_t j = 0; j + 1 < L; ++j)
        csv.row(j, {static_cast<double>(cfg.grid.steps << j), mesh[j], to_finest[j],
                    successive[j]});
    csv.close();
    man.add_file(dir, "study.csv");

    auto fit = fit_order(std::vector<double>(mesh.begin(), mesh.end() - 1), to_finest);
    if (fit.valid) {
        man.residuals["fitted_order"] = fit.order;
        man.residuals["r_squared"] = fit.r_squared;
    } else {
        man.residuals["fitted_order"] = nullptr;
    }
    return 0;
}

} // namespace run_detail

// Run one experiment into out_dir, writing artifacts and a manifest.
// Returns the process exit code (0 ok, 3 numerical abort or failed audit);
// configuration and IO problems escape as exceptions for the caller to map.
inline int run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    WallClock clock;
    RunManifest man;
    man.scenario = scenario_name(cfg.scenario);
    man.config_echo = cfg.echo;

    int code = 0;
    const bool study = cfg.levels > 0 && cfg.scenario != Scenario::wong_zakai &&
                       cfg.scenario != Scenario::audit;
    if (study) {
        code = run_detail::run_study(cfg, out_dir, man);
    } else if (cfg.scenario == Scenario::wong_zakai) {
        code = run_detail::run_wong_zakai(cfg, out_dir, man);
    } else if (cfg.scenario == Scenario::audit) {
        code = run_detail::run_audit(cfg, out_dir, man);
    } else {
        auto grid = TimeGrid::uniform(cfg.grid.t0, cfg.grid.t_final, cfg.grid.steps);
        auto path = run_detail::build_driver(cfg.driver, grid);
        code = run_detail::run_single(cfg, path, out_dir, man, nullptr);
    }
    man.wall_seconds = clock.seconds();
    man.write(out_dir);
    return code;
}

} // namespace roughflow
