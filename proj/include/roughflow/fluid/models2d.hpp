#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "roughflow/fluid/fields.hpp"
#include "roughflow/fluid/spectral.hpp"
#include "roughflow/fluid/stepping.hpp"

namespace roughflow {

struct Velocity2D {
    std::vector<double> ux, uy;
};

// Velocity from vorticity: u_hat = i (k2, -k1) w_hat / |k|^2 with the mean
// mode pinned to zero.  The input must be mean-free; the harmonic (k = 0)
// velocity component is fixed to zero by the same constraint that makes the
// inversion well defined on the torus.
inline Velocity2D biot_savart(const Spectral2D& sp, const std::vector<double>& omega) {
    const std::size_t n = sp.size(), cols = n / 2 + 1;
    std::vector<std::complex<double>> w(sp.modes());
    sp.forward(omega.data(), w.data());
    double scale = 0.0;
    for (double v : omega) scale = std::max(scale, std::abs(v));
    if (std::abs(w[0].real()) > 1e-12 * (1.0 + scale))
        throw ConfigError("vorticity must be mean-free for the velocity inversion");

    std::vector<std::complex<double>> cx(sp.modes()), cy(sp.modes());
    for (std::size_t i = 0; i < n; ++i) {
        double k1 = static_cast<double>(sp.wave_x(i));
        for (std::size_t j = 0; j < cols; ++j) {
            double k2 = static_cast<double>(j);
            double k2n = k1 * k1 + k2 * k2;
            std::size_t idx = i * cols + j;
            if (k2n == 0.0 || i == n / 2 || j == n / 2) {
                cx[idx] = cy[idx] = 0.0;
                continue;
            }
            std::complex<double> f = std::complex<double>(0.0, 1.0) * w[idx] / k2n;
            cx[idx] = k2 * f;
            cy[idx] = -k1 * f;
        }
    }
    Velocity2D u;
    u.ux.resize(sp.points());
    u.uy.resize(sp.points());
    sp.inverse(cx.data(), u.ux.data());
    sp.inverse(cy.data(), u.uy.data());
    return u;
}

// Vorticity tendency -(u . grad) w with u recovered from w; the advection
// product is dealiased and its mean pinned (it vanishes identically for
// divergence-free transport).
inline std::vector<double> euler_vorticity_drift(const Spectral2D& sp,
                                                 const std::vector<double>& omega) {
    auto u = biot_savart(sp, omega);
    auto wx = sp.deriv_x(omega);
    auto wy = sp.deriv_y(omega);
    std::vector<double> adv(sp.points());
    for (std::size_t j = 0; j < sp.points(); ++j)
        adv[j] = u.ux[j] * wx[j] + u.uy[j] * wy[j];
    adv = sp.filter(adv, true);
    for (double& v : adv) v = -v;
    return adv;
}

// Linear rough operator -(xi_k . grad) w; requires divergence-free noise so
// transport is measure-preserving.
inline std::vector<double> euler_rough_op(const Spectral2D& sp,
                                          const std::vector<double>& omega,
                                          const RoughFieldSet2D& fields, std::size_t k) {
    if (!fields.divergence_free)
        throw ConfigError("rough transport needs divergence-free noise fields");
    auto wx = sp.deriv_x(omega);
    auto wy = sp.deriv_y(omega);
    const double* fx = fields.component(k, 0);
    const double* fy = fields.component(k, 1);
    std::vector<double> adv(sp.points());
    for (std::size_t j = 0; j < sp.points(); ++j) adv[j] = fx[j] * wx[j] + fy[j] * wy[j];
    adv = sp.filter(adv, true);
    for (double& v : adv) v = -v;
    return adv;
}

namespace detail {

inline double rough_intensity_2d(const RoughFieldSet2D& fields, const double* dz,
                                 std::size_t K, std::size_t n) {
    const double two_pi = 2.0 * std::acos(-1.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k)
        acc += std::abs(dz[k]) * fields.max_abs[k] * static_cast<double>(n) / two_pi;
    return acc;
}

} // namespace detail

// One Strang step of the rough vorticity model over driver interval i.
inline void step_rough_pde(Spectral2D& sp, std::vector<double>& omega,
                           const RoughFieldSet2D& fields, const GeometricRoughPath& p,
                           std::size_t i, const PdeStepControls& ctl = {},
                           StepMonitor* mon = nullptr) {
    const double t = p.grid().t[i], dt = p.grid().t[i + 1] - t;
    {
        auto u = biot_savart(sp, omega);
        double speed = 0.0;
        for (std::size_t j = 0; j < sp.points(); ++j)
            speed = std::max({speed, std::abs(u.ux[j]), std::abs(u.uy[j])});
        detail::enforce_cfl(dt, speed, sp.size(), ctl, t, mon);
    }
    if (fields.count > 0) {
        std::vector<double> dz(p.dim());
        p.increment(i, i + 1, dz.data());
        detail::enforce_rough_bound(
            detail::rough_intensity_2d(fields, dz.data(), fields.count, sp.size()), ctl, t,
            mon);
    }

    auto drift = [&](double, const std::vector<double>& v) {
        return euler_vorticity_drift(sp, v);
    };
    auto rough = [&](std::size_t k, const std::vector<double>& v) {
        return euler_rough_op(sp, v, fields, k);
    };
    detail::strang_rough_step(omega, p, i, fields.count, drift, rough, ctl.drift_substeps);

    StepMonitor scratch;
    (mon ? *mon : scratch).record_tail(sp.tail_fraction(omega), ctl, t);
}

inline void deterministic_reference_step_2d(Spectral2D& sp, std::vector<double>& omega,
                                            double t, double dt, std::size_t substeps = 1) {
    auto drift = [&](double, const std::vector<double>& v) {
        return euler_vorticity_drift(sp, v);
    };
    detail::deterministic_reference_step(omega, t, dt, drift, substeps);
}

// Mean-free pressure parts of the momentum form, recovered by spectral
// Poisson solves: the smooth part balances the self-advection divergence,
// each rough part balances its noise term.  Diagnostics only; the vorticity
// dynamics never consumes them.
struct PressureFields {
    std::vector<double> p;                // laplace p = -div (u . grad u)
    std::vector<std::vector<double>> q;   // laplace q_k = -div ((xi_k . grad) u + (grad xi_k)^T u)
};

namespace detail {

inline std::vector<double> solve_poisson_neg_div(const Spectral2D& sp,
                                                 const std::vector<double>& sx,
                                                 const std::vector<double>& sy) {
    // solve laplace phi = -div s, mean-free
    const std::size_t n = sp.size(), cols = n / 2 + 1;
    std::vector<std::complex<double>> cx(sp.modes()), cy(sp.modes());
    sp.forward(sx.data(), cx.data());
    sp.forward(sy.data(), cy.data());
    for (std::size_t i = 0; i < n; ++i) {
        double k1 = static_cast<double>(sp.wave_x(i));
        for (std::size_t j = 0; j < cols; ++j) {
            double k2 = static_cast<double>(j);
            double k2n = k1 * k1 + k2 * k2;
            std::size_t idx = i * cols + j;
            if (k2n == 0.0 || i == n / 2 || j == n / 2) {
                cx[idx] = 0.0;
                continue;
            }
            std::complex<double> div =
                std::complex<double>(0.0, 1.0) * (k1 * cx[idx] + k2 * cy[idx]);
            cx[idx] = div / k2n; // phi_hat = div_hat / |k|^2
        }
    }
    std::vector<double> out(sp.points());
    sp.inverse(cx.data(), out.data());
    return out;
}

} // namespace detail

inline PressureFields recover_pressures(const Spectral2D& sp, const std::vector<double>& omega,
                                        const RoughFieldSet2D& fields) {
    auto u = biot_savart(sp, omega);
    auto uxx = sp.deriv_x(u.ux), uxy = sp.deriv_y(u.ux);
    auto uyx = sp.deriv_x(u.uy), uyy = sp.deriv_y(u.uy);
    const std::size_t npts = sp.points();

    PressureFields out;
    {
        std::vector<double> sx(npts), sy(npts);
        for (std::size_t j = 0; j < npts; ++j) {
            sx[j] = u.ux[j] * uxx[j] + u.uy[j] * uxy[j];
            sy[j] = u.ux[j] * uyx[j] + u.uy[j] * uyy[j];
        }
        out.p = detail::solve_poisson_neg_div(sp, sp.filter(sx), sp.filter(sy));
    }
    for (std::size_t k = 0; k < fields.count; ++k) {
        const double* fx = fields.component(k, 0);
        const double* fy = fields.component(k, 1);
        std::vector<double> xi_x(fx, fx + npts), xi_y(fy, fy + npts);
        auto gxx = sp.deriv_x(xi_x), gxy = sp.deriv_y(xi_x);
        auto gyx = sp.deriv_x(xi_y), gyy = sp.deriv_y(xi_y);
        std::vector<double> sx(npts), sy(npts);
        for (std::size_t j = 0; j < npts; ++j) {
            // (xi . grad) u + (grad xi)^T u, component by component
            sx[j] = fx[j] * uxx[j] + fy[j] * uxy[j] + gxx[j] * u.ux[j] + gyx[j] * u.uy[j];
            sy[j] = fx[j] * uyx[j] + fy[j] * uyy[j] + gxy[j] * u.ux[j] + gyy[j] * u.uy[j];
        }
        out.q.push_back(detail::solve_poisson_neg_div(sp, sp.filter(sx), sp.filter(sy)));
    }
    return out;
}

struct Invariants2D {
    double t = 0.0;
    double energy = 0.0;     // (1/2) integral of |u|^2
    double enstrophy = 0.0;  // integral of w^2
    double casimir4 = 0.0;   // integral of w^4, alias-free on the doubled grid
    double mean_omega = 0.0;
};

inline Invariants2D measure_invariants_2d(Spectral2D& sp, const std::vector<double>& omega,
                                          double t) {
    const double two_pi = 2.0 * std::acos(-1.0);
    const double cell = two_pi * two_pi / static_cast<double>(sp.points());
    Invariants2D out;
    out.t = t;
    out.mean_omega = sp.mean(omega);
    auto u = biot_savart(sp, omega);
    double e = 0.0, z = 0.0;
    for (std::size_t j = 0; j < sp.points(); ++j) {
        e += u.ux[j] * u.ux[j] + u.uy[j] * u.uy[j];
        z += omega[j] * omega[j];
    }
    out.energy = 0.5 * e * cell;
    out.enstrophy = z * cell;
    auto fine = sp.upsample2(omega);
    double c4 = 0.0;
    for (double v : fine) c4 += v * v * v * v;
    out.casimir4 = c4 * two_pi * two_pi / static_cast<double>(fine.size());
    return out;
}

} // namespace roughflow
