#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "roughflow/core/errors.hpp"
#include "roughflow/core/grid.hpp"
#include "roughflow/core/rough_path.hpp"

namespace roughflow {

// Writes the K path components at time t into out.
using PathFn = std::function<void(double t, double* out)>;

struct Quadrature {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights; // sum to 2
};

// Gauss-Legendre rule computed by Newton iteration on the Legendre
// recurrence; cached per order.
inline const Quadrature& gauss_legendre(std::size_t order) {
    if (order < 2 || order > 64)
        throw ConfigError("quadrature order must lie in [2, 64]");
    static std::map<std::size_t, Quadrature> cache;
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    Quadrature q;
    q.nodes.resize(order);
    q.weights.resize(order);
    const std::size_t n = order;
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre P_n(x) and derivative via the three-term recurrence.
            double p0 = 1.0, p1 = x;
            for (std::size_t j = 2; j <= n; ++j) {
                double pj = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = pj;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.nodes[i] = x;
        q.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(order, std::move(q)).first->second;
}

namespace detail {

// 6th-order central finite difference used when no analytic derivative is
// supplied; step chosen near the round-off/truncation optimum for doubles.
inline void fd_derivative(const PathFn& value, double t, double dt_local, std::size_t dim,
                          double* out) {
    double h = std::max(1e-9, 0.005 * std::min(std::abs(dt_local), 1.0));
    std::vector<double> fp(dim), fm(dim);
    std::vector<double> acc(dim, 0.0);
    const double c[3] = {45.0, -9.0, 1.0};
    for (int s = 1; s <= 3; ++s) {
        value(t + s * h, fp.data());
        value(t - s * h, fm.data());
        for (std::size_t k = 0; k < dim; ++k) acc[k] += c[s - 1] * (fp[k] - fm[k]);
    }
    for (std::size_t k = 0; k < dim; ++k) out[k] = acc[k] / (60.0 * h);
}

} // namespace detail

// Canonical lift of a differentiable path: trace sampled at the grid points,
// second level per interval by Gauss quadrature of
//
//     zz(l, k) = int (Z^l(s) - Z^l(t_i)) Zdot^k(s) ds.
//
// After construction the geometricity residual doubles as a quadrature
// convergence check: the symmetric part of the quadrature answer equals
// (1/2) dZ (x) dZ exactly iff the rule resolved the integrand, so a residual
// above tolerance aborts with a suggestion to raise the order.
inline GeometricRoughPath lift_smooth(const PathFn& value, const PathFn& derivative,
                                      std::size_t dim, const TimeGrid& grid,
                                      double alpha = 1.0, std::size_t quad_order = 8,
                                      double quad_tol = 1e-10) {
    const Quadrature& q = gauss_legendre(quad_order);
    const std::size_t np = grid.points(), n = grid.intervals(), kk = dim * dim;
    std::vector<double> vals(np * dim), blocks(n * kk, 0.0);
    for (std::size_t i = 0; i < np; ++i) value(grid.t[i], vals.data() + i * dim);

    std::vector<double> zs(dim), zdot(dim);
    for (std::size_t i = 0; i < n; ++i) {
        double a = grid.t[i], b = grid.t[i + 1], half = 0.5 * (b - a), mid = 0.5 * (a + b);
        double* zz = blocks.data() + i * kk;
        const double* za = vals.data() + i * dim;
        for (std::size_t jn = 0; jn < q.nodes.size(); ++jn) {
            double s = mid + half * q.nodes[jn];
            value(s, zs.data());
            if (derivative)
                derivative(s, zdot.data());
            else
                detail::fd_derivative(value, s, b - a, dim, zdot.data());
            double w = q.weights[jn] * half;
            for (std::size_t l = 0; l < dim; ++l) {
                double dl = zs[l] - za[l];
                for (std::size_t k = 0; k < dim; ++k) zz[l * dim + k] += w * dl * zdot[k];
            }
        }
    }

    GeometricRoughPath path(grid, dim, std::move(vals), std::move(blocks), alpha);
    double scale = 0.0;
    for (double v : path.raw_values()) scale = std::max(scale, std::abs(v));
    if (path.geometricity_residual() > quad_tol * (1.0 + scale * scale))
        throw NumericalAbort("smooth lift quadrature did not converge; raise quad_order "
                             "or refine the grid",
                             grid.front());
    return path;
}

// Exact lift of the piecewise-linear interpolant of the given samples, on
// the breakpoints themselves: along a chord zz = (1/2) dZ (x) dZ (no area).
inline GeometricRoughPath lift_piecewise_linear(const TimeGrid& grid,
                                                std::vector<double> values, std::size_t dim,
                                                double alpha) {
    if (values.size() != grid.points() * dim)
        throw ConfigError("piecewise-linear lift: sample array has wrong length");
    const std::size_t n = grid.intervals(), kk = dim * dim;
    std::vector<double> blocks(n * kk);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < dim; ++l) {
            double dl = values[(i + 1) * dim + l] - values[i * dim + l];
            for (std::size_t k = 0; k < dim; ++k) {
                double dk = values[(i + 1) * dim + k] - values[i * dim + k];
                blocks[i * kk + l * dim + k] = 0.5 * dl * dk;
            }
        }
    return GeometricRoughPath(grid, dim, std::move(values), std::move(blocks), alpha);
}

// Sample a callable at the grid points and lift the interpolant.
inline GeometricRoughPath lift_sampled(const PathFn& value, std::size_t dim,
                                       const TimeGrid& grid, double alpha) {
    std::vector<double> vals(grid.points() * dim);
    for (std::size_t i = 0; i < grid.points(); ++i) value(grid.t[i], vals.data() + i * dim);
    return lift_piecewise_linear(grid, std::move(vals), dim, alpha);
}

} // namespace roughflow
