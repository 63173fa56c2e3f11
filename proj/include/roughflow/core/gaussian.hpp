#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "roughflow/core/errors.hpp"
#include "roughflow/core/grid.hpp"
#include "roughflow/core/lifts.hpp"
#include "roughflow/core/rough_path.hpp"

namespace roughflow {

// Fractional Brownian covariance R(s,t) = (1/2)(s^2H + t^2H - |t-s|^2H).
inline double fbm_covariance(double s, double t, double hurst) {
    if (s < 0.0 || t < 0.0) throw ConfigError("fBm covariance needs non-negative times");
    double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

struct GaussianSpec {
    double hurst = 0.4;
    std::size_t dim = 1;            // independent components
    std::uint64_t seed = 0;
    std::size_t fine_resolution = 64; // dyadic subdivisions per output interval
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Standard normals from a seeded mt19937_64 via Box-Muller on 53-bit
// uniforms.  Self-contained so reruns are bit-identical on one platform
// (std::normal_distribution leaves its algorithm implementation-defined).
class NormalStream {
  public:
    explicit NormalStream(std::uint64_t seed) : eng_(seed) {}
    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // in (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
};

} // namespace detail

// Exact-covariance fBm sampler on a fixed fine grid.  The covariance matrix
// over the positive grid times is factored once (Eigen LLT, lower
// triangular); a draw is L * g with iid standard normals g.  When the matrix
// is numerically semidefinite a jitter ladder eps * I with
// eps = 1e-14 ... 1e-10 is tried before giving up.
class FbmGridSampler {
  public:
    FbmGridSampler(TimeGrid fine, double hurst) : grid_(std::move(fine)), hurst_(hurst) {
        if (!(hurst_ > 1.0 / 3.0 && hurst_ <= 1.0))
            throw ConfigError("Hurst parameter must lie in (1/3, 1]");
        if (grid_.front() < 0.0)
            throw ConfigError("Gaussian driver grids must start at t >= 0");
        if (grid_.points() > 16384)
            throw ConfigError("Gaussian fine grid exceeds 16384 points; dense "
                              "factorization would be too costly, lower fine_resolution");
        idx_.assign(grid_.points(), -1);
        std::vector<double> pos;
        for (std::size_t i = 0; i < grid_.points(); ++i) {
            if (grid_.t[i] > 0.0) {
                idx_[i] = static_cast<int>(pos.size());
                pos.push_back(grid_.t[i]);
            }
        }
        const auto n = static_cast<Eigen::Index>(pos.size());
        Eigen::MatrixXd cov(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                cov(i, j) = fbm_covariance(pos[static_cast<std::size_t>(i)],
                                           pos[static_cast<std::size_t>(j)], hurst_);
        const double ladder[] = {0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10};
        bool ok = false;
        for (double eps : ladder) {
            Eigen::MatrixXd shifted = cov;
            for (Eigen::Index i = 0; i < n; ++i) shifted(i, i) += eps;
            Eigen::LLT<Eigen::MatrixXd> llt(shifted);
            if (llt.info() == Eigen::Success) {
                chol_ = llt.matrixL();
                jitter_ = eps;
                ok = true;
                break;
            }
        }
        if (!ok) {
            double dmax = 0.0, dmin = 1e300;
            for (Eigen::Index i = 0; i < n; ++i) {
                dmax = std::max(dmax, cov(i, i));
                dmin = std::min(dmin, cov(i, i));
            }
            throw NumericalAbort("fBm covariance factorization failed even with max "
                                 "jitter 1e-10 (diagonal range " +
                                     std::to_string(dmin) + " .. " + std::to_string(dmax) +
                                     ")",
                                 grid_.front());
        }
    }

    const TimeGrid& grid() const { return grid_; }
    double jitter_used() const { return jitter_; }

    // Path values (points x dim), component streams derived from the seed so
    // ensembles over seeds are embarrassingly parallel and reproducible.
    std::vector<double> sample(std::uint64_t seed, std::size_t dim) const {
        const std::size_t np = grid_.points();
        std::vector<double> vals(np * dim, 0.0);
        const auto n = chol_.rows();
        Eigen::VectorXd g(n), z(n);
        for (std::size_t k = 0; k < dim; ++k) {
            detail::NormalStream rng(detail::splitmix64(seed ^ (0x517cc1b727220a95ULL * (k + 1))));
            for (Eigen::Index i = 0; i < n; ++i) g(i) = rng.next();
            z = chol_ * g;
            for (std::size_t i = 0; i < np; ++i)
                if (idx_[i] >= 0) vals[i * dim + k] = z(idx_[i]);
        }
        return vals;
    }

  private:
    TimeGrid grid_;
    double hurst_;
    Eigen::MatrixXd chol_;
    double jitter_ = 0.0;
    std::vector<int> idx_; // grid point -> covariance row, -1 at t == 0
};

// Canonical Gaussian lift: exact sampling on the dyadically refined grid,
// exact piecewise-linear lift there, then Chen coarsening back to the output
// grid.  alpha is Holder metadata for diagnostics (default 0.4, the usual
// choice against H in (1/3, 1/2]).
inline GeometricRoughPath lift_gaussian(const GaussianSpec& spec, const TimeGrid& grid,
                                        double alpha = 0.4) {
    if (spec.dim == 0) throw ConfigError("Gaussian driver needs at least one component");
    if (spec.fine_resolution == 0)
        throw ConfigError("fine_resolution must be positive");
    TimeGrid fine = grid.refined(spec.fine_resolution);
    FbmGridSampler sampler(fine, spec.hurst);
    std::vector<double> vals = sampler.sample(spec.seed, spec.dim);
    GeometricRoughPath fine_path =
        lift_piecewise_linear(sampler.grid(), std::move(vals), spec.dim, alpha);
    if (spec.fine_resolution == 1) return fine_path;
    return coarsen_stride(fine_path, spec.fine_resolution);
}

// Nested-refinement family for a fixed realization: one draw on the finest
// dyadic grid, coarser levels by subsampling, every level lifted and brought
// back to the output grid.  Level 0 is the coarsest; all levels share the
// underlying sample, which is what a mollification study needs.
inline std::vector<GeometricRoughPath> lift_gaussian_levels(const GaussianSpec& spec,
                                                            const TimeGrid& grid,
                                                            std::size_t levels,
                                                            double alpha = 0.4) {
    if (levels == 0) throw ConfigError("refinement study needs at least one level");
    std::size_t finest = spec.fine_resolution << (levels - 1);
    TimeGrid fine = grid.refined(finest);
    FbmGridSampler sampler(fine, spec.hurst);
    std::vector<double> vals = sampler.sample(spec.seed, spec.dim);
    GeometricRoughPath finest_path =
        lift_piecewise_linear(sampler.grid(), vals, spec.dim, alpha);

    std::vector<GeometricRoughPath> out;
    for (std::size_t lev = 0; lev < levels; ++lev) {
        std::size_t res = spec.fine_resolution << lev;     // per output interval
        std::size_t stride = finest / res;                 // subsample stride
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i <= fine.intervals(); i += stride) keep.push_back(i);
        std::vector<double> sub_vals(keep.size() * spec.dim);
        std::vector<double> ts(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            ts[i] = fine.t[keep[i]];
            for (std::size_t k = 0; k < spec.dim; ++k)
                sub_vals[i * spec.dim + k] = vals[keep[i] * spec.dim + k];
        }
        GeometricRoughPath lifted =
            lift_piecewise_linear(TimeGrid(std::move(ts)), std::move(sub_vals), spec.dim, alpha);
        out.push_back(res == 1 ? lifted : coarsen_stride(lifted, res));
    }
    return out;
}

} // namespace roughflow
