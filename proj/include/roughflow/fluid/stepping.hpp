#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "roughflow/core/ode.hpp"
#include "roughflow/core/rough_path.hpp"

namespace roughflow {

struct PdeStepControls {
    double cfl_safety = 0.8;         // bound on dt * speed * n / (2 pi)
    double rough_safety = 0.8;       // bound on the per-step rough intensity
    double tail_warn_fraction = 0.01;
    double tail_abort_fraction = 0.10;
    std::size_t drift_substeps = 1;  // RK4 substeps per drift half
};

// Worst-case step diagnostics accumulated over a run; surfaced in manifests.
struct StepMonitor {
    double max_cfl = 0.0;
    double max_rough = 0.0;
    double max_tail_fraction = 0.0;
    bool tail_warning = false;

    void record_tail(double fraction, const PdeStepControls& ctl, double last_valid) {
        max_tail_fraction = std::max(max_tail_fraction, fraction);
        if (fraction > ctl.tail_abort_fraction)
            throw NumericalAbort("spectral tail fraction " + std::to_string(fraction) +
                                     " exceeds the abort threshold; the run is under-resolved",
                                 last_valid);
        if (fraction > ctl.tail_warn_fraction) tail_warning = true;
    }
};

namespace detail {

inline void enforce_cfl(double dt, double speed, std::size_t n, const PdeStepControls& ctl,
                        double t, StepMonitor* mon) {
    const double two_pi = 2.0 * std::acos(-1.0);
    double cfl = dt * speed * static_cast<double>(n) / two_pi;
    if (mon) mon->max_cfl = std::max(mon->max_cfl, cfl);
    if (cfl > ctl.cfl_safety) {
        double factor = std::ceil(cfl / ctl.cfl_safety);
        throw ConfigError("time step too large at t = " + std::to_string(t) +
                          " (advective step covers " + std::to_string(cfl) +
                          " grid cells); refine the time grid by a factor of " +
                          std::to_string(static_cast<long long>(factor)));
    }
}

inline void enforce_rough_bound(double intensity, const PdeStepControls& ctl, double t,
                                StepMonitor* mon) {
    if (mon) mon->max_rough = std::max(mon->max_rough, intensity);
    if (intensity > ctl.rough_safety) {
        double factor = std::ceil(intensity / ctl.rough_safety);
        throw ConfigError("rough increment too large at t = " + std::to_string(t) +
                          " (intensity " + std::to_string(intensity) +
                          "); refine the driver grid by a factor of about " +
                          std::to_string(static_cast<long long>(factor)));
    }
}

// Strang split over grid interval i: drift by RK4 over the first half, one
// level-2 increment of the linear rough part, drift over the second half.
// The rough operators G_k are linear in the state, so the second-level term
// is the exact double application
//
//   u <- u + sum_k (G_k u) dZ^k + sum_k G_k( sum_l zz^{lk} (G_l u) ),
//
// no Jacobian approximations involved.
template <class DriftFn, class RoughFn>
void strang_rough_step(std::vector<double>& u, const GeometricRoughPath& p, std::size_t i,
                       std::size_t num_fields, DriftFn&& drift, RoughFn&& rough_op,
                       std::size_t substeps) {
    const double t = p.grid().t[i], dt = p.grid().t[i + 1] - t;
    const std::size_t K = p.dim(), d = u.size();
    rk4_vec(drift, t, 0.5 * dt, substeps, u);

    if (num_fields > 0) {
        if (num_fields != K)
            throw ConfigError("step: rough field count must match the driver dimension");
        std::vector<double> dz(K), zz(K * K);
        p.increment(i, i + 1, dz.data());
        p.second_level(i, i + 1, zz.data());

        std::vector<std::vector<double>> w(K);
        for (std::size_t l = 0; l < K; ++l) w[l] = rough_op(l, u);
        std::vector<double> gain(d, 0.0), v(d);
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t a = 0; a < d; ++a) gain[a] += w[k][a] * dz[k];
            std::fill(v.begin(), v.end(), 0.0);
            bool any = false;
            for (std::size_t l = 0; l < K; ++l) {
                double c = zz[l * K + k];
                if (c == 0.0) continue;
                any = true;
                for (std::size_t a = 0; a < d; ++a) v[a] += c * w[l][a];
            }
            if (any) {
                std::vector<double> gv = rough_op(k, v);
                for (std::size_t a = 0; a < d; ++a) gain[a] += gv[a];
            }
        }
        for (std::size_t a = 0; a < d; ++a) u[a] += gain[a];
    }

    rk4_vec(drift, t + 0.5 * dt, 0.5 * dt, substeps, u);
    check_state(u.data(), d, 1e12, t);
}

// Reference deterministic step assembled from the same drift operator: the
// identical two RK4 half sweeps, nothing else.  A zero-noise rough run must
// reproduce this byte for byte.
template <class DriftFn>
void deterministic_reference_step(std::vector<double>& u, double t, double dt, DriftFn&& drift,
                                  std::size_t substeps) {
    rk4_vec(drift, t, 0.5 * dt, substeps, u);
    rk4_vec(drift, t + 0.5 * dt, 0.5 * dt, substeps, u);
    check_state(u.data(), u.size(), 1e12, t);
}

} // namespace detail
} // namespace roughflow
