#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "roughflow/core/errors.hpp"

namespace roughflow {
namespace detail {

// Classical RK4 for dy/dt = g(t, y) over [t0, t0 + span] in n substeps,
// state given as a raw buffer of length d.
template <class G>
void rk4(G&& g, double t0, double span, std::size_t n, std::size_t d, double* y) {
    std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
    const double h = span / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
        double t = t0 + h * static_cast<double>(s);
        g(t, y, k1.data());
        for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + 0.5 * h * k1[a];
        g(t + 0.5 * h, tmp.data(), k2.data());
        for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + 0.5 * h * k2[a];
        g(t + 0.5 * h, tmp.data(), k3.data());
        for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + h * k3[a];
        g(t + h, tmp.data(), k4.data());
        for (std::size_t a = 0; a < d; ++a)
            y[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    }
}

// Same scheme for vector-valued right-hand sides returning by value; used by
// the spectral solvers where tendencies come back as fresh arrays.
template <class G>
void rk4_vec(G&& g, double t0, double span, std::size_t n, std::vector<double>& y) {
    const std::size_t d = y.size();
    const double h = span / static_cast<double>(n);
    std::vector<double> tmp(d);
    for (std::size_t s = 0; s < n; ++s) {
        double t = t0 + h * static_cast<double>(s);
        std::vector<double> k1 = g(t, y);
        for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + 0.5 * h * k1[a];
        std::vector<double> k2 = g(t + 0.5 * h, tmp);
        for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + 0.5 * h * k2[a];
        std::vector<double> k3 = g(t + 0.5 * h, tmp);
        for (std::size_t a = 0; a < d; ++a) tmp[a] = y[a] + h * k3[a];
        std::vector<double> k4 = g(t + h, tmp);
        for (std::size_t a = 0; a < d; ++a)
            y[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    }
}

inline void check_state(const double* y, std::size_t d, double bound, double last_valid) {
    for (std::size_t a = 0; a < d; ++a)
        if (!std::isfinite(y[a]) || std::abs(y[a]) > bound)
            throw NumericalAbort("flow left the admissible ball", last_valid);
}

} // namespace detail
} // namespace roughflow
