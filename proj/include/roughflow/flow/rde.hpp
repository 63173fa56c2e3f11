#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "roughflow/core/ode.hpp"
#include "roughflow/core/rough_path.hpp"
#include "roughflow/flow/vector_field.hpp"

namespace roughflow {

enum class StepScheme { davie, magnus };

struct SolveOptions {
    std::size_t drift_substeps = 1; // RK4 substeps per drift half in the split step
    std::size_t ode_substeps = 4;   // RK4 substeps for the frozen exponential field
    double blowup_threshold = 1e12; // abort once any coordinate leaves this ball
};

// One step of the second-order expansion over grid span [i, j]:
//
//   Y <- Y + xi_k(Y) dZ^k + (D xi_k xi_l)(Y) zz^{lk},
//
// with the drift advanced by RK4 halves around the rough increment.  Local
// error is O(|span|^{3a}) for an a-rough driver.
inline void davie_step(double* y, const VectorFieldFamily& f, const GeometricRoughPath& p,
                       std::size_t i, std::size_t j, const SolveOptions& opt = {}) {
    const std::size_t d = f.dim, K = p.dim();
    if (f.num_rough != K) throw ConfigError("step: field count must match driver dimension");
    const double ts = p.grid().t[i], span = p.grid().t[j] - p.grid().t[i];

    if (f.drift)
        detail::rk4([&](double t, const double* x, double* o) { f.eval_drift(t, x, o); }, ts,
                    0.5 * span, opt.drift_substeps, d, y);

    std::vector<double> dz(K), zz(K * K), fields(K * d), jac(d * d), w(d), gain(d, 0.0);
    p.increment(i, j, dz.data());
    p.second_level(i, j, zz.data());
    for (std::size_t k = 0; k < K; ++k) f.eval_rough(k, y, fields.data() + k * d);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t a = 0; a < d; ++a) gain[a] += fields[k * d + a] * dz[k];
        // w = sum_l zz^{lk} xi_l(y), then push through D xi_k
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t l = 0; l < K; ++l) {
            double c = zz[l * K + k];
            for (std::size_t a = 0; a < d; ++a) w[a] += c * fields[l * d + a];
        }
        f.eval_rough_jacobian(k, y, jac.data());
        for (std::size_t a = 0; a < d; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < d; ++b) acc += jac[a * d + b] * w[b];
            gain[a] += acc;
        }
    }
    for (std::size_t a = 0; a < d; ++a) y[a] += gain[a];

    if (f.drift)
        detail::rk4([&](double t, const double* x, double* o) { f.eval_drift(t, x, o); },
                    ts + 0.5 * span, 0.5 * span, opt.drift_substeps, d, y);

    detail::check_state(y, d, opt.blowup_threshold, ts);
}

// Exponential (frozen-field) step over [i, j]: integrate the autonomous field
//
//   V(x) = u(t_mid, x) span + xi_k(x) dZ^k + sum_{k<l} [xi_k, xi_l](x) A^{kl}
//
// over unit time with RK4.  A is the antisymmetric part of zz; for a
// geometric driver this agrees with davie_step to O(|span|^{3a}).  The drift
// is frozen at the midpoint time: freezing at the left endpoint would cost
// O(|span|^2) locally for time-dependent drifts, visibly below the scheme
// order once the driver is smoother than Brownian.
inline void magnus_step(double* y, const VectorFieldFamily& f, const GeometricRoughPath& p,
                        std::size_t i, std::size_t j, const SolveOptions& opt = {}) {
    const std::size_t d = f.dim, K = p.dim();
    if (f.num_rough != K) throw ConfigError("step: field count must match driver dimension");
    const double ts = p.grid().t[i], span = p.grid().t[j] - p.grid().t[i];

    std::vector<double> dz(K), zz(K * K);
    p.increment(i, j, dz.data());
    p.second_level(i, j, zz.data());

    std::vector<double> field(d), bracket(d), drift(d);
    const double t_mid = ts + 0.5 * span;
    auto frozen = [&](double, const double* x, double* out) {
        std::fill(out, out + d, 0.0);
        if (f.drift) {
            f.eval_drift(t_mid, x, drift.data());
            for (std::size_t a = 0; a < d; ++a) out[a] += span * drift[a];
        }
        for (std::size_t k = 0; k < K; ++k) {
            f.eval_rough(k, x, field.data());
            for (std::size_t a = 0; a < d; ++a) out[a] += dz[k] * field[a];
        }
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t l = k + 1; l < K; ++l) {
                double area = 0.5 * (zz[k * K + l] - zz[l * K + k]);
                if (area == 0.0) continue;
                f.eval_bracket(k, l, x, bracket.data());
                for (std::size_t a = 0; a < d; ++a) out[a] += area * bracket[a];
            }
    };
    detail::rk4(frozen, 0.0, 1.0, opt.ode_substeps, d, y);
    detail::check_state(y, d, opt.blowup_threshold, ts);
}

inline void rde_step(double* y, StepScheme scheme, const VectorFieldFamily& f,
                     const GeometricRoughPath& p, std::size_t i, std::size_t j,
                     const SolveOptions& opt = {}) {
    if (scheme == StepScheme::davie)
        davie_step(y, f, p, i, j, opt);
    else
        magnus_step(y, f, p, i, j, opt);
}

// Particle trajectories under the flow of the RDE, sampled on the driver's
// grid.  Integration happens in the universal cover; torus domains reduce
// coordinates only through the wrapped accessor.
struct FlowMap {
    std::shared_ptr<const GeometricRoughPath> path;
    VectorFieldFamily fields;
    StepScheme scheme = StepScheme::davie;
    SolveOptions options;
    std::size_t num_particles = 0;
    std::vector<double> trajectories; // (points) x (particles) x dim

    const double* position(std::size_t time_index, std::size_t particle) const {
        return trajectories.data() +
               (time_index * num_particles + particle) * fields.dim;
    }

    void wrapped_position(std::size_t time_index, std::size_t particle, double* out) const {
        const double* x = position(time_index, particle);
        for (std::size_t a = 0; a < fields.dim; ++a) {
            out[a] = x[a];
            if (fields.domain == DomainKind::torus) {
                double p = fields.periods[a];
                out[a] -= p * std::floor(out[a] / p);
            }
        }
    }
};

inline FlowMap solve_flow(const VectorFieldFamily& f,
                          std::shared_ptr<const GeometricRoughPath> path,
                          const std::vector<double>& particles, StepScheme scheme,
                          const SolveOptions& opt = {}) {
    f.validate();
    if (!path) throw ConfigError("solve_flow: missing driver");
    if (particles.empty() || particles.size() % f.dim != 0)
        throw ConfigError("solve_flow: particle buffer must be a multiple of dim");
    const std::size_t M = particles.size() / f.dim, d = f.dim, np = path->points();

    FlowMap flow;
    flow.path = path;
    flow.fields = f;
    flow.scheme = scheme;
    flow.options = opt;
    flow.num_particles = M;
    flow.trajectories.assign(np * M * d, 0.0);
    std::copy(particles.begin(), particles.end(), flow.trajectories.begin());

    for (std::size_t m = 0; m < M; ++m) {
        std::vector<double> y(particles.begin() + m * d, particles.begin() + (m + 1) * d);
        for (std::size_t i = 0; i + 1 < np; ++i) {
            rde_step(y.data(), scheme, f, *path, i, i + 1, opt);
            std::copy(y.begin(), y.end(),
                      flow.trajectories.begin() + ((i + 1) * M + m) * d);
        }
    }
    return flow;
}

// Sewing defect of the one-step maps: advance each probe over [s, t] in a
// single step and through the intermediate index, and return the largest
// gap.  Zero when the one-step map is an exact semigroup (constant fields);
// O(|t - s|^{3a}) in general.
inline double flow_composition_residual(const FlowMap& flow, std::size_t s, std::size_t theta,
                                        std::size_t t, const std::vector<double>& probes) {
    if (!(s < theta && theta < t) || t >= flow.path->points())
        throw ConfigError("composition residual: need s < theta < t on the grid");
    if (probes.empty() || probes.size() % flow.fields.dim != 0)
        throw ConfigError("composition residual: probe buffer must be a multiple of dim");
    const std::size_t d = flow.fields.dim, M = probes.size() / d;
    double worst = 0.0;
    std::vector<double> direct(d), through(d);
    for (std::size_t m = 0; m < M; ++m) {
        std::copy(probes.begin() + m * d, probes.begin() + (m + 1) * d, direct.begin());
        std::copy(direct.begin(), direct.end(), through.begin());
        rde_step(direct.data(), flow.scheme, flow.fields, *flow.path, s, t, flow.options);
        rde_step(through.data(), flow.scheme, flow.fields, *flow.path, s, theta, flow.options);
        rde_step(through.data(), flow.scheme, flow.fields, *flow.path, theta, t, flow.options);
        for (std::size_t a = 0; a < d; ++a)
            worst = std::max(worst, std::abs(direct[a] - through[a]));
    }
    return worst;
}

// Pull probe points back through the inverse flow at a grid index by solving
// the time-reversed RDE: the driver restricted to [t_0, t_i] is reversed
// (geometric lifts are closed under reversal) and the drift is negated with
// its time argument mirrored.
inline std::vector<double> inverse_flow_points(const FlowMap& flow, std::size_t time_index,
                                               const std::vector<double>& probes) {
    if (time_index == 0) return probes;
    if (time_index >= flow.path->points())
        throw ConfigError("inverse flow: time index outside the grid");
    if (probes.empty() || probes.size() % flow.fields.dim != 0)
        throw ConfigError("inverse flow: probe buffer must be a multiple of dim");

    auto rev = std::make_shared<const GeometricRoughPath>(
        subpath(*flow.path, 0, time_index).reversed());
    VectorFieldFamily back = flow.fields;
    if (flow.fields.drift) {
        double t0 = rev->grid().front(), t1 = rev->grid().back();
        auto fwd = flow.fields.drift;
        std::size_t d = flow.fields.dim;
        back.drift = [fwd, t0, t1, d](double r, const double* x, double* out) {
            fwd(t0 + t1 - r, x, out);
            for (std::size_t a = 0; a < d; ++a) out[a] = -out[a];
        };
        back.drift_jacobian = nullptr;
    }

    const std::size_t d = flow.fields.dim, M = probes.size() / d;
    std::vector<double> out(probes);
    for (std::size_t m = 0; m < M; ++m) {
        double* y = out.data() + m * d;
        for (std::size_t i = 0; i + 1 < rev->points(); ++i)
            rde_step(y, flow.scheme, back, *rev, i, i + 1, flow.options);
    }
    return out;
}

// Solution of the transport problem by pullback: f(t, x) = f0(inverse flow x).
inline std::vector<double> advect_scalar(const std::function<double(const double*)>& f0,
                                         const FlowMap& flow, std::size_t time_index,
                                         const std::vector<double>& probes) {
    auto pulled = inverse_flow_points(flow, time_index, probes);
    const std::size_t d = flow.fields.dim, M = pulled.size() / d;
    std::vector<double> vals(M);
    for (std::size_t m = 0; m < M; ++m) vals[m] = f0(pulled.data() + m * d);
    return vals;
}

// Forward-then-backward defect of the flow at a grid index; the scheme's
// global error bounds this, so it decays at the sewing rate under
// refinement.
inline double advection_roundtrip_residual(const FlowMap& flow, std::size_t time_index,
                                           const std::vector<double>& probes) {
    auto pulled = inverse_flow_points(flow, time_index, probes);
    const std::size_t d = flow.fields.dim, M = pulled.size() / d;
    double worst = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        std::vector<double> y(pulled.begin() + m * d, pulled.begin() + (m + 1) * d);
        for (std::size_t i = 0; i < time_index; ++i)
            rde_step(y.data(), flow.scheme, flow.fields, *flow.path, i, i + 1, flow.options);
        for (std::size_t a = 0; a < d; ++a)
            worst = std::max(worst, std::abs(y[a] - probes[m * d + a]));
    }
    return worst;
}

// Central-difference determinant of the flow Jacobian at one point, the
// volume-preservation probe for divergence-free fields.
inline double jacobian_determinant_fd(const FlowMap& flow, std::size_t time_index,
                                      const double* x0, double h = 1e-5) {
    const std::size_t d = flow.fields.dim;
    if (d > 3) throw ConfigError("jacobian determinant: supported up to dimension 3");
    std::vector<double> jac(d * d), y(d);
    for (std::size_t b = 0; b < d; ++b) {
        std::vector<double> plus(x0, x0 + d), minus(x0, x0 + d);
        plus[b] += h;
        minus[b] -= h;
        for (int sgn = 0; sgn < 2; ++sgn) {
            std::copy(sgn == 0 ? plus.begin() : minus.begin(),
                      sgn == 0 ? plus.end() : minus.end(), y.begin());
            for (std::size_t i = 0; i < time_index; ++i)
                rde_step(y.data(), flow.scheme, flow.fields, *flow.path, i, i + 1,
                         flow.options);
            for (std::size_t a = 0; a < d; ++a)
                jac[a * d + b] += (sgn == 0 ? 1.0 : -1.0) * y[a] / (2.0 * h);
        }
    }
    if (d == 1) return jac[0];
    if (d == 2) return jac[0] * jac[3] - jac[1] * jac[2];
    return jac[0] * (jac[4] * jac[8] - jac[5] * jac[7]) -
           jac[1] * (jac[3] * jac[8] - jac[5] * jac[6]) +
           jac[2] * (jac[3] * jac[7] - jac[4] * jac[6]);
}

} // namespace roughflow
