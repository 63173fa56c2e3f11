#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "roughflow/core/errors.hpp"
#include "roughflow/fluid/fields.hpp"
#include "roughflow/fluid/models2d.hpp"
#include "roughflow/fluid/spectral.hpp"
#include "roughflow/flow/vector_field.hpp"

namespace roughflow {

// Trigonometric interpolant of a grid field, evaluable anywhere on the
// torus.  Exact on band-limited data, so loop and particle diagnostics fed
// from dealiased fields pay no interpolation error at all.  Nyquist rows are
// assumed empty, which every dealiased pipeline field satisfies.
class SpectralSampler2D {
public:
    SpectralSampler2D() = default;

    static SpectralSampler2D from_field(const Spectral2D& sp, const std::vector<double>& f) {
        SpectralSampler2D s;
        s.n_ = sp.size();
        s.c_.resize(sp.modes());
        sp.forward(f.data(), s.c_.data());
        return s;
    }

    static SpectralSampler2D from_coeffs(std::size_t n, std::vector<std::complex<double>> c) {
        SpectralSampler2D s;
        s.n_ = n;
        s.c_ = std::move(c);
        return s;
    }

    std::size_t size() const { return n_; }

    double value(double x, double y) const {
        double v;
        accumulate(x, y, &v, nullptr, nullptr);
        return v;
    }

    void value_and_gradient(double x, double y, double* v, double* gx, double* gy) const {
        accumulate(x, y, v, gx, gy);
    }

private:
    std::size_t n_ = 0;
    std::vector<std::complex<double>> c_;

    // f(x,y) = Re sum_{i != n/2} e^{i k1 x} (c[i,0] + 2 sum_{0<j<n/2} c[i,j] e^{i j y})
    void accumulate(double x, double y, double* v, double* gx, double* gy) const {
        using cplx = std::complex<double>;
        const std::size_t cols = n_ / 2 + 1, jmax = n_ / 2;
        const cplx ey(std::cos(y), std::sin(y));

        cplx total(0.0), total_x(0.0), total_y(0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            if (i == n_ / 2) continue;
            double k1 = i < n_ / 2 ? static_cast<double>(i)
                                   : static_cast<double>(i) - static_cast<double>(n_);
            cplx row = c_[i * cols];
            cplx row_y(0.0);
            cplx ph = ey;
            for (std::size_t j = 1; j < jmax; ++j) {
                cplx term = 2.0 * c_[i * cols + j] * ph;
                row += term;
                if (gy) row_y += term * cplx(0.0, static_cast<double>(j));
                ph *= ey;
            }
            cplx ex(std::cos(k1 * x), std::sin(k1 * x));
            total += ex * row;
            if (gx) total_x += ex * row * cplx(0.0, k1);
            if (gy) total_y += ex * row_y;
        }
        if (v) *v = total.real();
        if (gx) *gx = total_x.real();
        if (gy) *gy = total_y.real();
    }
};

// Velocity snapshots of a 2D run, stored as interpolants on the driver grid
// and evaluated with linear interpolation in time.  This is the bridge from
// grid-based fluid states to pointwise particle and loop transport.
struct VelocityHistory {
    std::size_t n = 0;
    std::vector<double> times;
    std::vector<SpectralSampler2D> ux, uy;

    void record(Spectral2D& sp, const std::vector<double>& omega, double t) {
        if (n == 0) n = sp.size();
        if (n != sp.size()) throw ConfigError("velocity history: grid size changed mid-run");
        if (!times.empty() && t <= times.back())
            throw ConfigError("velocity history: snapshot times must increase");
        auto u = biot_savart(sp, omega);
        times.push_back(t);
        ux.push_back(SpectralSampler2D::from_field(sp, u.ux));
        uy.push_back(SpectralSampler2D::from_field(sp, u.uy));
    }

    std::size_t snapshots() const { return times.size(); }

    void velocity(double t, double x, double y, double* out) const {
        if (times.empty()) throw ConfigError("velocity history: no snapshots recorded");
        if (times.size() == 1 || t <= times.front()) {
            std::size_t i = t <= times.front() ? 0 : times.size() - 1;
            out[0] = ux[i].value(x, y);
            out[1] = uy[i].value(x, y);
            return;
        }
        if (t >= times.back()) {
            out[0] = ux.back().value(x, y);
            out[1] = uy.back().value(x, y);
            return;
        }
        std::size_t hi =
            std::upper_bound(times.begin(), times.end(), t) - times.begin();
        std::size_t lo = hi - 1;
        double w = (t - times[lo]) / (times[hi] - times[lo]);
        out[0] = (1.0 - w) * ux[lo].value(x, y) + w * ux[hi].value(x, y);
        out[1] = (1.0 - w) * uy[lo].value(x, y) + w * uy[hi].value(x, y);
    }
};

// Particle-transport view of a fluid run: drift from the recorded velocity,
// rough part from the interpolants of the noise fields, with the analytic
// gradients the level-2 particle step needs.  The family holds a reference
// to the history; it must outlive any flow solved with it.
inline VectorFieldFamily advection_family(const VelocityHistory& hist, const Spectral2D& sp,
                                          const RoughFieldSet2D& fields) {
    const double two_pi = 2.0 * std::acos(-1.0);
    VectorFieldFamily fam;
    fam.dim = 2;
    fam.num_rough = fields.count;
    fam.domain = DomainKind::torus;
    fam.periods = {two_pi, two_pi};
    fam.drift = [&hist](double t, const double* x, double* out) {
        hist.velocity(t, x[0], x[1], out);
    };

    if (fields.count > 0) {
        auto samplers = std::make_shared<std::vector<SpectralSampler2D>>();
        for (std::size_t k = 0; k < fields.count; ++k) {
            std::vector<double> fx(fields.component(k, 0), fields.component(k, 0) + sp.points());
            std::vector<double> fy(fields.component(k, 1), fields.component(k, 1) + sp.points());
            samplers->push_back(SpectralSampler2D::from_field(sp, fx));
            samplers->push_back(SpectralSampler2D::from_field(sp, fy));
        }
        fam.rough = [samplers](std::size_t k, const double* x, double* out) {
            out[0] = (*samplers)[2 * k].value(x[0], x[1]);
            out[1] = (*samplers)[2 * k + 1].value(x[0], x[1]);
        };
        fam.rough_jacobian = [samplers](std::size_t k, const double* x, double* jac) {
            double v;
            // jac is row-major d(out_a)/d(x_b)
            (*samplers)[2 * k].value_and_gradient(x[0], x[1], &v, jac + 0, jac + 1);
            (*samplers)[2 * k + 1].value_and_gradient(x[0], x[1], &v, jac + 2, jac + 3);
        };
    }
    return fam;
}

} // namespace roughflow
