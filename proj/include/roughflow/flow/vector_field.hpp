#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "roughflow/core/errors.hpp"

namespace roughflow {

enum class DomainKind { euclidean, torus };

// Driving data for dY = u_t(Y) dt + xi_k(Y) dZ^k.  Evaluators write into
// caller-provided buffers; Jacobians are row-major with jac[a*dim + b] the
// derivative of component a in direction b.  Empty drift means zero drift;
// an empty rough Jacobian falls back to central differences, which is
// accurate enough for the level-2 stepper but slower, so analytic closures
// are preferred wherever a closed form exists.
struct VectorFieldFamily {
    std::size_t dim = 0;
    std::size_t num_rough = 0;
    DomainKind domain = DomainKind::euclidean;
    std::vector<double> periods; // one per coordinate, torus domains only

    std::function<void(double t, const double* x, double* out)> drift;
    std::function<void(double t, const double* x, double* jac)> drift_jacobian;
    std::function<void(std::size_t k, const double* x, double* out)> rough;
    std::function<void(std::size_t k, const double* x, double* jac)> rough_jacobian;
    // Directional derivative of the rough Jacobian: out = (D^2 xi_k)(x)[v],
    // a dim x dim matrix.  Optional; consumed only by the self check.
    std::function<void(std::size_t k, const double* x, const double* v, double* out)>
        rough_hessian_vec;

    void validate() const {
        if (dim == 0) throw ConfigError("vector fields: dimension must be positive");
        if (num_rough > 0 && !rough)
            throw ConfigError("vector fields: rough evaluator missing");
        if (domain == DomainKind::torus) {
            if (periods.size() != dim)
                throw ConfigError("vector fields: torus needs one period per coordinate");
            for (double p : periods)
                if (!(p > 0.0)) throw ConfigError("vector fields: periods must be positive");
        }
    }

    void eval_drift(double t, const double* x, double* out) const {
        if (drift) {
            drift(t, x, out);
        } else {
            for (std::size_t a = 0; a < dim; ++a) out[a] = 0.0;
        }
    }

    void eval_rough(std::size_t k, const double* x, double* out) const { rough(k, x, out); }

    void eval_rough_jacobian(std::size_t k, const double* x, double* jac) const {
        if (rough_jacobian) {
            rough_jacobian(k, x, jac);
            return;
        }
        // central-difference fallback, column by column
        const double h = 1e-6;
        std::vector<double> xp(x, x + dim), fp(dim), fm(dim);
        for (std::size_t b = 0; b < dim; ++b) {
            xp[b] = x[b] + h;
            rough(k, xp.data(), fp.data());
            xp[b] = x[b] - h;
            rough(k, xp.data(), fm.data());
            xp[b] = x[b];
            for (std::size_t a = 0; a < dim; ++a) jac[a * dim + b] = (fp[a] - fm[a]) / (2.0 * h);
        }
    }

    // Lie bracket [xi_k, xi_l](x) = (D xi_l) xi_k - (D xi_k) xi_l.
    void eval_bracket(std::size_t k, std::size_t l, const double* x, double* out) const {
        std::vector<double> fk(dim), fl(dim), jk(dim * dim), jl(dim * dim);
        eval_rough(k, x, fk.data());
        eval_rough(l, x, fl.data());
        eval_rough_jacobian(k, x, jk.data());
        eval_rough_jacobian(l, x, jl.data());
        for (std::size_t a = 0; a < dim; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < dim; ++b)
                acc += jl[a * dim + b] * fk[b] - jk[a * dim + b] * fl[b];
            out[a] = acc;
        }
    }
};

// Compare supplied derivative evaluators against central-difference probes
// of the evaluators one level below.  Returns the largest absolute mismatch
// over the probe points (flattened, num_points x dim); analytic closures
// should come in well under 1e-6.
inline double self_check_fields(const VectorFieldFamily& f, const std::vector<double>& probes,
                                double t = 0.0) {
    f.validate();
    if (probes.size() % f.dim != 0)
        throw ConfigError("self check: probe buffer must be a multiple of dim");
    const std::size_t d = f.dim, n = probes.size() / d;
    const double h = 1e-5;
    double worst = 0.0;
    std::vector<double> jac(d * d), fd(d * d), xp(d), fp(d), fm(d);

    auto probe_jac = [&](auto&& eval, const double* x, double* out) {
        for (std::size_t b = 0; b < d; ++b) {
            std::copy(x, x + d, xp.begin());
            xp[b] = x[b] + h;
            eval(xp.data(), fp.data());
            xp[b] = x[b] - h;
            eval(xp.data(), fm.data());
            for (std::size_t a = 0; a < d; ++a) out[a * d + b] = (fp[a] - fm[a]) / (2.0 * h);
        }
    };

    for (std::size_t p = 0; p < n; ++p) {
        const double* x = probes.data() + p * d;
        if (f.drift && f.drift_jacobian) {
            f.drift_jacobian(t, x, jac.data());
            probe_jac([&](const double* q, double* o) { f.drift(t, q, o); }, x, fd.data());
            for (std::size_t i = 0; i < d * d; ++i)
                worst = std::max(worst, std::abs(jac[i] - fd[i]));
        }
        for (std::size_t k = 0; k < f.num_rough; ++k) {
            if (f.rough_jacobian) {
                f.rough_jacobian(k, x, jac.data());
                probe_jac([&](const double* q, double* o) { f.rough(k, q, o); }, x, fd.data());
                for (std::size_t i = 0; i < d * d; ++i)
                    worst = std::max(worst, std::abs(jac[i] - fd[i]));
            }
            if (f.rough_hessian_vec && f.rough_jacobian) {
                for (std::size_t b = 0; b < d; ++b) {
                    std::vector<double> dir(d, 0.0);
                    dir[b] = 1.0;
                    f.rough_hessian_vec(k, x, dir.data(), jac.data());
                    std::vector<double> jp(d * d), jm(d * d);
                    std::copy(x, x + d, xp.begin());
                    xp[b] = x[b] + h;
                    f.rough_jacobian(k, xp.data(), jp.data());
                    xp[b] = x[b] - h;
                    f.rough_jacobian(k, xp.data(), jm.data());
                    for (std::size_t i = 0; i < d * d; ++i)
                        worst = std::max(worst,
                                         std::abs(jac[i] - (jp[i] - jm[i]) / (2.0 * h)));
                }
            }
        }
    }
    return worst;
}

// xi_k(x) = c_k, constant sections.  Their level-2 stepper term vanishes.
inline VectorFieldFamily constant_rough_fields(std::size_t dim,
                                               std::vector<std::vector<double>> sections) {
    for (const auto& c : sections)
        if (c.size() != dim) throw ConfigError("constant fields: wrong section length");
    VectorFieldFamily f;
    f.dim = dim;
    f.num_rough = sections.size();
    auto data = std::make_shared<std::vector<std::vector<double>>>(std::move(sections));
    f.rough = [data, dim](std::size_t k, const double*, double* out) {
        std::copy((*data)[k].begin(), (*data)[k].end(), out);
    };
    f.rough_jacobian = [dim](std::size_t, const double*, double* jac) {
        std::fill(jac, jac + dim * dim, 0.0);
    };
    return f;
}

// xi_k(x) = A_k x with row-major matrices; dY = A_k Y dZ^k.
inline VectorFieldFamily linear_rough_fields(std::size_t dim,
                                             std::vector<std::vector<double>> matrices) {
    for (const auto& m : matrices)
        if (m.size() != dim * dim) throw ConfigError("linear fields: wrong matrix size");
    VectorFieldFamily f;
    f.dim = dim;
    f.num_rough = matrices.size();
    auto data = std::make_shared<std::vector<std::vector<double>>>(std::move(matrices));
    f.rough = [data, dim](std::size_t k, const double* x, double* out) {
        const auto& m = (*data)[k];
        for (std::size_t a = 0; a < dim; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < dim; ++b) acc += m[a * dim + b] * x[b];
            out[a] = acc;
        }
    };
    f.rough_jacobian = [data, dim](std::size_t k, const double*, double* jac) {
        std::copy((*data)[k].begin(), (*data)[k].end(), jac);
    };
    return f;
}

// The R^3 probe pair xi_1 = (1, 0, -x_2/2), xi_2 = (0, 1, x_1/2) whose
// bracket is the constant vertical field: the third component of the flow
// accumulates exactly the Levy area of the driver.
inline VectorFieldFamily area_probe_fields() {
    VectorFieldFamily f;
    f.dim = 3;
    f.num_rough = 2;
    f.rough = [](std::size_t k, const double* x, double* out) {
        if (k == 0) {
            out[0] = 1.0;
            out[1] = 0.0;
            out[2] = -0.5 * x[1];
        } else {
            out[0] = 0.0;
            out[1] = 1.0;
            out[2] = 0.5 * x[0];
        }
    };
    f.rough_jacobian = [](std::size_t k, const double*, double* jac) {
        std::fill(jac, jac + 9, 0.0);
        if (k == 0)
            jac[2 * 3 + 1] = -0.5;
        else
            jac[2 * 3 + 0] = 0.5;
    };
    f.rough_hessian_vec = [](std::size_t, const double*, const double*, double* out) {
        std::fill(out, out + 9, 0.0);
    };
    return f;
}

} // namespace roughflow
