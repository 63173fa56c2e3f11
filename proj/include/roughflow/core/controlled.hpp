#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "roughflow/core/errors.hpp"
#include "roughflow/core/rough_path.hpp"

namespace roughflow {

// Path controlled by a rough driver: values Y_i in V = R^m at the driver's
// grid times together with the Gubinelli derivative Y'_i in V^K, meaning
// dY ~ Y' dZ with a remainder of order 2 alpha.  Derivative layout is
// row-major (a, l) -> a*K + l with l the driver component.
class ControlledPath {
  public:
    ControlledPath(std::shared_ptr<const GeometricRoughPath> base, std::size_t value_dim,
                   std::vector<double> values, std::vector<double> derivative)
        : base_(std::move(base)), vdim_(value_dim), values_(std::move(values)),
          deriv_(std::move(derivative)) {
        if (!base_) throw ConfigError("controlled path needs a base rough path");
        const std::size_t np = base_->points(), K = base_->dim();
        if (vdim_ == 0 || values_.size() != np * vdim_ || deriv_.size() != np * vdim_ * K)
            throw ConfigError("controlled path arrays do not match grid/value dimensions");
        for (double v : values_)
            if (!std::isfinite(v)) throw ConfigError("controlled path values must be finite");
        for (double v : deriv_)
            if (!std::isfinite(v))
                throw ConfigError("controlled path derivative must be finite");
    }

    const GeometricRoughPath& base() const { return *base_; }
    const std::shared_ptr<const GeometricRoughPath>& base_ptr() const { return base_; }
    std::size_t value_dim() const { return vdim_; }
    std::size_t driver_dim() const { return base_->dim(); }
    std::size_t points() const { return base_->points(); }

    double value(std::size_t i, std::size_t a) const { return values_[i * vdim_ + a]; }
    const double* value_row(std::size_t i) const { return values_.data() + i * vdim_; }
    double deriv(std::size_t i, std::size_t a, std::size_t l) const {
        return deriv_[(i * vdim_ + a) * base_->dim() + l];
    }
    const double* deriv_row(std::size_t i) const {
        return deriv_.data() + i * vdim_ * base_->dim();
    }
    const std::vector<double>& raw_values() const { return values_; }
    const std::vector<double>& raw_derivative() const { return deriv_; }

    // Estimated 2 alpha-Holder seminorm of R_{st} = dY_{st} - Y'_s dZ_{st}
    // over grid pairs with |t - s| <= T/4 (large gaps would bias the fit).
    double remainder_seminorm() const {
        const std::size_t np = points(), K = base_->dim();
        const double window = base_->grid().span() / 4.0;
        const double two_alpha = 2.0 * base_->alpha();
        std::vector<double> dz(K);
        double worst = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            for (std::size_t j = i + 1; j < np; ++j) {
                double gap = base_->grid().t[j] - base_->grid().t[i];
                if (gap > window) break;
                base_->increment(i, j, dz.data());
                double r2 = 0.0;
                for (std::size_t a = 0; a < vdim_; ++a) {
                    double r = value(j, a) - value(i, a);
                    for (std::size_t l = 0; l < K; ++l) r -= deriv(i, a, l) * dz[l];
                    r2 += r * r;
                }
                worst = std::max(worst, std::sqrt(r2) / std::pow(gap, two_alpha));
            }
        }
        return worst;
    }

    // The driver itself, controlled with identity derivative.
    static ControlledPath canonical(std::shared_ptr<const GeometricRoughPath> base) {
        const std::size_t np = base->points(), K = base->dim();
        std::vector<double> vals(base->raw_values());
        std::vector<double> der(np * K * K, 0.0);
        for (std::size_t i = 0; i < np; ++i)
            for (std::size_t k = 0; k < K; ++k) der[(i * K + k) * K + k] = 1.0;
        return ControlledPath(std::move(base), K, std::move(vals), std::move(der));
    }

    static ControlledPath constant(std::shared_ptr<const GeometricRoughPath> base,
                                   std::vector<double> c) {
        const std::size_t np = base->points(), K = base->dim(), m = c.size();
        std::vector<double> vals(np * m), der(np * m * K, 0.0);
        for (std::size_t i = 0; i < np; ++i)
            for (std::size_t a = 0; a < m; ++a) vals[i * m + a] = c[a];
        return ControlledPath(std::move(base), m, std::move(vals), std::move(der));
    }

    // Sample closures for Y(t, Z_t) style data; both write m (resp. m*K)
    // doubles.  Pass an empty derivative closure for Y' = 0.
    static ControlledPath
    from_functions(std::shared_ptr<const GeometricRoughPath> base, std::size_t value_dim,
                   const std::function<void(double t, const double* z, double* out)>& value,
                   const std::function<void(double t, const double* z, double* out)>& deriv) {
        const std::size_t np = base->points(), K = base->dim();
        std::vector<double> vals(np * value_dim), der(np * value_dim * K, 0.0);
        for (std::size_t i = 0; i < np; ++i) {
            value(base->grid().t[i], base->value_row(i), vals.data() + i * value_dim);
            if (deriv)
                deriv(base->grid().t[i], base->value_row(i),
                      der.data() + i * value_dim * K);
        }
        return ControlledPath(std::move(base), value_dim, std::move(vals), std::move(der));
    }

  private:
    std::shared_ptr<const GeometricRoughPath> base_;
    std::size_t vdim_;
    std::vector<double> values_;
    std::vector<double> deriv_;
};

namespace detail {
inline void require_shared_base(const ControlledPath& x, const ControlledPath& y) {
    if (x.base_ptr().get() != y.base_ptr().get())
        throw ConfigError("controlled paths must share the same base rough path");
}
} // namespace detail

// Left-point compensated Riemann sums of the sewing germ
//
//     Xi_{st} = Y_s dZ_{st} + Y'_s zz_{st},
//
// for Y with values in R^{rows x K} (rows = 1 gives the R^K pairing).  The
// value at t_j accumulates the germ over [t_0, t_j]; the output is itself
// controlled with Gubinelli derivative Y.  Refining the grid moves the
// values by O(mesh^{3 alpha - 1}).
inline ControlledPath rough_integral(const ControlledPath& Y, std::size_t rows = 1) {
    const std::size_t K = Y.driver_dim(), np = Y.points();
    if (Y.value_dim() != rows * K)
        throw ConfigError("rough_integral: integrand must have rows*K components");
    const GeometricRoughPath& Z = Y.base();
    std::vector<double> vals(np * rows, 0.0), dz(K), zz(K * K);
    for (std::size_t i = 0; i + 1 < np; ++i) {
        Z.increment(i, i + 1, dz.data());
        Z.second_level(i, i + 1, zz.data());
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                acc += Y.value(i, r * K + k) * dz[k];
                for (std::size_t l = 0; l < K; ++l)
                    acc += Y.deriv(i, r * K + k, l) * zz[l * K + k];
            }
            vals[(i + 1) * rows + r] = vals[i * rows + r] + acc;
        }
    }
    // derivative of the integral is the integrand
    std::vector<double> der(np * rows * K);
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < K; ++k)
                der[(i * rows + r) * K + k] = Y.value(i, r * K + k);
    return ControlledPath(Y.base_ptr(), rows, std::move(vals), std::move(der));
}

// Bilinear pairing B : V_X x V_Y -> R^{out_dim} supplied as a closure.
struct Bilinear {
    std::size_t out_dim;
    std::function<void(const double* x, const double* y, double* out)> apply;
};

// Compensated sums of the controlled-vs-controlled germ
//
//     B(X_s, dY_{st}) + B(X'_s, Y'_s) zz_{st},
//
// where the second term contracts B(X'^k, Y'^l) against zz^{kl}.  Reduces to
// rough_integral when Y is the canonical lift of the driver.
inline ControlledPath integral_controlled_vs_controlled(const ControlledPath& X,
                                                        const ControlledPath& Y,
                                                        const Bilinear& B) {
    detail::require_shared_base(X, Y);
    const std::size_t K = X.driver_dim(), np = X.points(), m = B.out_dim;
    const std::size_t mx = X.value_dim(), my = Y.value_dim();
    const GeometricRoughPath& Z = X.base();
    std::vector<double> vals(np * m, 0.0), der(np * m * K, 0.0);
    std::vector<double> dz(K), zz(K * K), dy(my), tmp(m), xk(mx), yl(my);
    for (std::size_t i = 0; i < np; ++i) {
        // derivative of the output at t_i: B(X_i, Y'^l_i)
        for (std::size_t l = 0; l < K; ++l) {
            for (std::size_t a = 0; a < my; ++a) yl[a] = Y.deriv(i, a, l);
            B.apply(X.value_row(i), yl.data(), tmp.data());
            for (std::size_t a = 0; a < m; ++a) der[(i * m + a) * K + l] = tmp[a];
        }
        if (i + 1 == np) break;
        Z.increment(i, i + 1, dz.data());
        Z.second_level(i, i + 1, zz.data());
        for (std::size_t a = 0; a < my; ++a) dy[a] = Y.value(i + 1, a) - Y.value(i, a);
        B.apply(X.value_row(i), dy.data(), tmp.data());
        for (std::size_t a = 0; a < m; ++a) vals[(i + 1) * m + a] = vals[i * m + a] + tmp[a];
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t a = 0; a < mx; ++a) xk[a] = X.deriv(i, a, k);
            for (std::size_t l = 0; l < K; ++l) {
                for (std::size_t a = 0; a < my; ++a) yl[a] = Y.deriv(i, a, l);
                B.apply(xk.data(), yl.data(), tmp.data());
                for (std::size_t a = 0; a < m; ++a)
                    vals[(i + 1) * m + a] += tmp[a] * zz[k * K + l];
            }
        }
    }
    return ControlledPath(X.base_ptr(), m, std::move(vals), std::move(der));
}

// Chain rule: (Phi(Y), DPhi(Y) Y').  map writes out_dim values, dmap the
// out_dim x in_dim Jacobian row-major.
inline ControlledPath
compose_with_map(const ControlledPath& Y, std::size_t out_dim,
                 const std::function<void(const double* y, double* out)>& map,
                 const std::function<void(const double* y, double* jac)>& dmap) {
    const std::size_t K = Y.driver_dim(), np = Y.points(), mi = Y.value_dim();
    std::vector<double> vals(np * out_dim), der(np * out_dim * K, 0.0), jac(out_dim * mi);
    for (std::size_t i = 0; i < np; ++i) {
        map(Y.value_row(i), vals.data() + i * out_dim);
        dmap(Y.value_row(i), jac.data());
        for (std::size_t a = 0; a < out_dim; ++a)
            for (std::size_t l = 0; l < K; ++l) {
                double acc = 0.0;
                for (std::size_t b = 0; b < mi; ++b) acc += jac[a * mi + b] * Y.deriv(i, b, l);
                der[(i * out_dim + a) * K + l] = acc;
            }
    }
    return ControlledPath(Y.base_ptr(), out_dim, std::move(vals), std::move(der));
}

// Leibniz pairing: (B(X,Y), B(X',Y) + B(X,Y')).
inline ControlledPath product(const ControlledPath& X, const ControlledPath& Y,
                              const Bilinear& B) {
    detail::require_shared_base(X, Y);
    const std::size_t K = X.driver_dim(), np = X.points(), m = B.out_dim;
    const std::size_t mx = X.value_dim(), my = Y.value_dim();
    std::vector<double> vals(np * m), der(np * m * K), tmp(m), tmp2(m), xk(mx), yk(my);
    for (std::size_t i = 0; i < np; ++i) {
        B.apply(X.value_row(i), Y.value_row(i), vals.data() + i * m);
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t a = 0; a < mx; ++a) xk[a] = X.deriv(i, a, k);
            for (std::size_t a = 0; a < my; ++a) yk[a] = Y.deriv(i, a, k);
            B.apply(xk.data(), Y.value_row(i), tmp.data());
            B.apply(X.value_row(i), yk.data(), tmp2.data());
            for (std::size_t a = 0; a < m; ++a)
                der[(i * m + a) * K + k] = tmp[a] + tmp2[a];
        }
    }
    return ControlledPath(X.base_ptr(), m, std::move(vals), std::move(der));
}

} // namespace roughflow
