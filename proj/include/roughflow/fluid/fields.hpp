#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "roughflow/core/errors.hpp"
#include "roughflow/fluid/spectral.hpp"

namespace roughflow {

// Spatial noise coefficients for the 1D models: K scalar fields with their
// first two spectral derivatives cached, since every rough application needs
// them.  Fields are stored dealiased.
struct RoughFieldSet1D {
    std::size_t n = 0;
    std::size_t count = 0;
    std::vector<double> xi;   // count x n
    std::vector<double> dxi;  // count x n
    std::vector<double> ddxi; // count x n
    std::vector<double> max_abs;
    std::vector<double> max_grad;

    const double* field(std::size_t k) const { return xi.data() + k * n; }
    const double* grad(std::size_t k) const { return dxi.data() + k * n; }
    const double* grad2(std::size_t k) const { return ddxi.data() + k * n; }
};

inline RoughFieldSet1D make_rough_fields_1d(const Spectral1D& sp, std::vector<double> flat,
                                            std::size_t count) {
    if (count == 0) return {sp.size(), 0, {}, {}, {}, {}, {}};
    if (flat.size() != count * sp.size())
        throw ConfigError("rough fields: buffer must hold count x n samples");
    RoughFieldSet1D out;
    out.n = sp.size();
    out.count = count;
    out.xi.reserve(flat.size());
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> f(flat.begin() + k * out.n, flat.begin() + (k + 1) * out.n);
        f = sp.filter(f);
        auto d1 = sp.deriv(f), d2 = sp.deriv(f, 2);
        double ma = 0.0, mg = 0.0;
        for (std::size_t j = 0; j < out.n; ++j) {
            ma = std::max(ma, std::abs(f[j]));
            mg = std::max(mg, std::abs(d1[j]));
        }
        out.max_abs.push_back(ma);
        out.max_grad.push_back(mg);
        out.xi.insert(out.xi.end(), f.begin(), f.end());
        out.dxi.insert(out.dxi.end(), d1.begin(), d1.end());
        out.ddxi.insert(out.ddxi.end(), d2.begin(), d2.end());
    }
    return out;
}

// Planar noise vector fields for the 2D vorticity model.  Transport by them
// is only measure-preserving when they are divergence free, so construction
// checks that spectrally whenever the flag is requested.
struct RoughFieldSet2D {
    std::size_t n = 0;
    std::size_t count = 0;
    bool divergence_free = false;
    std::vector<double> xi; // count x 2 x n^2, component-major
    std::vector<double> max_abs;
    std::vector<double> max_grad;

    const double* component(std::size_t k, std::size_t axis) const {
        return xi.data() + (k * 2 + axis) * n * n;
    }
};

inline RoughFieldSet2D make_rough_fields_2d(const Spectral2D& sp, std::vector<double> flat,
                                            std::size_t count, bool require_divergence_free) {
    if (count == 0) return {sp.size(), 0, true, {}, {}, {}};
    const std::size_t npts = sp.points();
    if (flat.size() != count * 2 * npts)
        throw ConfigError("rough fields: buffer must hold count x 2 x n^2 samples");
    RoughFieldSet2D out;
    out.n = sp.size();
    out.count = count;
    out.divergence_free = true;
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> fx(flat.begin() + (k * 2) * npts,
                               flat.begin() + (k * 2 + 1) * npts);
        std::vector<double> fy(flat.begin() + (k * 2 + 1) * npts,
                               flat.begin() + (k * 2 + 2) * npts);
        fx = sp.filter(fx);
        fy = sp.filter(fy);
        auto div = sp.deriv_x(fx);
        auto dy = sp.deriv_y(fy);
        double worst = 0.0, ma = 0.0, mg = 0.0;
        auto gx1 = sp.deriv_y(fx), gx2 = sp.deriv_x(fy); // off-diagonal gradients
        for (std::size_t j = 0; j < npts; ++j) {
            worst = std::max(worst, std::abs(div[j] + dy[j]));
            ma = std::max({ma, std::abs(fx[j]), std::abs(fy[j])});
            mg = std::max({mg, std::abs(div[j]), std::abs(dy[j]), std::abs(gx1[j]),
                           std::abs(gx2[j])});
        }
        double scale = 1.0 + ma;
        if (worst > 1e-12 * scale) {
            out.divergence_free = false;
            if (require_divergence_free)
                throw ConfigError("rough fields: divergence residual " +
                                  std::to_string(worst) + " exceeds the tolerance");
        }
        out.max_abs.push_back(ma);
        out.max_grad.push_back(mg);
        out.xi.insert(out.xi.end(), fx.begin(), fx.end());
        out.xi.insert(out.xi.end(), fy.begin(), fy.end());
    }
    return out;
}

// Divergence-free fields from stream functions: xi = (-d
// psi/dy, d psi/dx), exact curl form in the spectral representation.
inline RoughFieldSet2D rough_fields_from_streams(const Spectral2D& sp,
                                                 const std::vector<double>& psis,
                                                 std::size_t count) {
    const std::size_t npts = sp.points();
    if (psis.size() != count * npts)
        throw ConfigError("rough fields: stream buffer must hold count x n^2 samples");
    std::vector<double> flat;
    flat.reserve(count * 2 * npts);
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> psi(psis.begin() + k * npts, psis.begin() + (k + 1) * npts);
        psi = sp.filter(psi);
        auto fx = sp.deriv_y(psi);
        for (double& v : fx) v = -v;
        auto fy = sp.deriv_x(psi);
        flat.insert(flat.end(), fx.begin(), fx.end());
        flat.insert(flat.end(), fy.begin(), fy.end());
    }
    return make_rough_fields_2d(sp, std::move(flat), count, true);
}

} // namespace roughflow
