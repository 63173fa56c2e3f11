#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "roughflow/fluid/fields.hpp"
#include "roughflow/fluid/spectral.hpp"
#include "roughflow/fluid/stepping.hpp"

namespace roughflow {

enum class Model1DKind { burgers, camassa_holm };

// Velocity tendency -3 u u_x of the 1D conservative transport model.
inline std::vector<double> burgers_drift(const Spectral1D& sp, const std::vector<double>& u) {
    auto prod = sp.multiply(u, sp.deriv(u));
    for (double& v : prod) v = -3.0 * v;
    return prod;
}

// Linear rough operator -(xi_k u_x + 2 u xi_k'), the transport-plus-
// stretching pairing that closes the model's product rule.
inline std::vector<double> burgers_rough_op(const Spectral1D& sp,
                                            const std::vector<double>& u,
                                            const RoughFieldSet1D& fields, std::size_t k) {
    const std::size_t n = sp.size();
    std::vector<double> xi(fields.field(k), fields.field(k) + n);
    std::vector<double> dxi(fields.grad(k), fields.grad(k) + n);
    auto t1 = sp.multiply(xi, sp.deriv(u));
    auto t2 = sp.multiply(u, dxi);
    for (std::size_t j = 0; j < n; ++j) t1[j] = -(t1[j] + 2.0 * t2[j]);
    return t1;
}

// (1 - alpha^2 d^2/dx^2)^{-1} by spectral division.
inline std::vector<double> ch_helmholtz_inverse(const Spectral1D& sp,
                                                const std::vector<double>& f, double alpha) {
    if (alpha < 0.0) throw ConfigError("the filtering scale alpha must be nonnegative");
    std::vector<std::complex<double>> c(sp.modes());
    sp.forward(f.data(), c.data());
    for (std::size_t k = 0; k < sp.modes(); ++k)
        c[k] /= 1.0 + alpha * alpha * static_cast<double>(k) * static_cast<double>(k);
    std::vector<double> out(sp.size());
    sp.inverse(c.data(), out.data());
    return out;
}

// Nonlocal drift -(u u_x + d/dx (1 - a^2 dxx)^{-1} (u^2 + (a^2/2) u_x^2));
// at alpha = 0 the inverse is the identity and this collapses to -3 u u_x.
inline std::vector<double> ch_drift(const Spectral1D& sp, const std::vector<double>& u,
                                    double alpha) {
    const std::size_t n = sp.size();
    auto ux = sp.deriv(u);
    auto local = sp.multiply(u, ux);
    auto usq = sp.multiply(u, u);
    auto uxsq = sp.multiply(ux, ux);
    for (std::size_t j = 0; j < n; ++j) usq[j] += 0.5 * alpha * alpha * uxsq[j];
    auto nonlocal = sp.deriv(ch_helmholtz_inverse(sp, usq, alpha));
    for (std::size_t j = 0; j < n; ++j) local[j] = -(local[j] + nonlocal[j]);
    return local;
}

// Linear rough operator -(xi_k u_x + (1 - a^2 dxx)^{-1}(2 u xi_k' + a^2 xi_k'' u_x)).
inline std::vector<double> ch_rough_op(const Spectral1D& sp, const std::vector<double>& u,
                                       const RoughFieldSet1D& fields, std::size_t k,
                                       double alpha) {
    const std::size_t n = sp.size();
    std::vector<double> xi(fields.field(k), fields.field(k) + n);
    std::vector<double> dxi(fields.grad(k), fields.grad(k) + n);
    std::vector<double> ddxi(fields.grad2(k), fields.grad2(k) + n);
    auto ux = sp.deriv(u);
    auto t1 = sp.multiply(xi, ux);
    auto s1 = sp.multiply(u, dxi);
    auto s2 = sp.multiply(ddxi, ux);
    for (std::size_t j = 0; j < n; ++j) s1[j] = 2.0 * s1[j] + alpha * alpha * s2[j];
    auto nonlocal = ch_helmholtz_inverse(sp, s1, alpha);
    for (std::size_t j = 0; j < n; ++j) t1[j] = -(t1[j] + nonlocal[j]);
    return t1;
}

namespace detail {

inline double max_abs(const std::vector<double>& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

inline double rough_intensity_1d(const RoughFieldSet1D& fields, const double* dz,
                                 std::size_t K, std::size_t n) {
    const double two_pi = 2.0 * std::acos(-1.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k)
        acc += std::abs(dz[k]) * (fields.max_abs[k] * static_cast<double>(n) / two_pi +
                                  2.0 * fields.max_grad[k]);
    return acc;
}

} // namespace detail

// One Strang step of the rough 1D model over grid interval i of the driver:
// half drift, exact linear level-2 rough increment, half drift, followed by
// the under-resolution monitor.
inline void step_rough_pde(Spectral1D& sp, std::vector<double>& u, Model1DKind kind,
                           double alpha, const RoughFieldSet1D& fields,
                           const GeometricRoughPath& p, std::size_t i,
                           const PdeStepControls& ctl = {}, StepMonitor* mon = nullptr) {
    const double t = p.grid().t[i], dt = p.grid().t[i + 1] - t;
    // characteristic speed of the steepening term, conservatively 3|u|
    detail::enforce_cfl(dt, 3.0 * detail::max_abs(u), sp.size(), ctl, t, mon);
    if (fields.count > 0) {
        std::vector<double> dz(p.dim());
        p.increment(i, i + 1, dz.data());
        detail::enforce_rough_bound(
            detail::rough_intensity_1d(fields, dz.data(), fields.count, sp.size()), ctl, t,
            mon);
    }

    auto drift = [&](double, const std::vector<double>& v) {
        return kind == Model1DKind::burgers ? burgers_drift(sp, v) : ch_drift(sp, v, alpha);
    };
    auto rough = [&](std::size_t k, const std::vector<double>& v) {
        return kind == Model1DKind::burgers ? burgers_rough_op(sp, v, fields, k)
                                            : ch_rough_op(sp, v, fields, k, alpha);
    };
    detail::strang_rough_step(u, p, i, fields.count, drift, rough, ctl.drift_substeps);

    StepMonitor scratch;
    (mon ? *mon : scratch).record_tail(sp.tail_fraction(u), ctl, t);
}

// The zero-noise reference: the same drift operator advanced by the same two
// RK4 half sweeps.  Rough runs with no noise fields must match this exactly.
inline void deterministic_reference_step_1d(Spectral1D& sp, std::vector<double>& u,
                                            Model1DKind kind, double alpha, double t,
                                            double dt, std::size_t substeps = 1) {
    auto drift = [&](double, const std::vector<double>& v) {
        return kind == Model1DKind::burgers ? burgers_drift(sp, v) : ch_drift(sp, v, alpha);
    };
    detail::deterministic_reference_step(u, t, dt, drift, substeps);
}

struct Invariants1D {
    double t = 0.0;
    double mean_u = 0.0;            // (1/2pi) integral of u
    double energy = 0.0;            // (1/2) integral of u^2 + a^2 u_x^2
    double momentum_integral = 0.0; // integral of m = u - a^2 u_xx
};

inline Invariants1D measure_invariants_1d(const Spectral1D& sp, const std::vector<double>& u,
                                          double alpha, double t) {
    const double two_pi = 2.0 * std::acos(-1.0);
    Invariants1D out;
    out.t = t;
    out.mean_u = sp.mean(u);
    auto ux = sp.deriv(u);
    double e = 0.0;
    for (std::size_t j = 0; j < sp.size(); ++j)
        e += u[j] * u[j] + alpha * alpha * ux[j] * ux[j];
    out.energy = 0.5 * e * two_pi / static_cast<double>(sp.size());
    auto uxx = sp.deriv(u, 2);
    double m = 0.0;
    for (std::size_t j = 0; j < sp.size(); ++j) m += u[j] - alpha * alpha * uxx[j];
    out.momentum_integral = m * two_pi / static_cast<double>(sp.size());
    return out;
}

} // namespace roughflow
