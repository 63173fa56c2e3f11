#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstring>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "roughflow/core/errors.hpp"

namespace roughflow {

// Plans are created with FFTW_ESTIMATE on purpose: measured planning picks an
// algorithm by timing, so two runs of the same binary could round differently
// and break byte-stable reruns.  Transforms always execute on the internal
// fftw-aligned buffers, which also keeps plan/buffer alignment trivially
// consistent.

namespace detail {

inline std::size_t checked_grid_size(std::size_t n) {
    if (n < 8 || (n & (n - 1)) != 0)
        throw ConfigError("spectral grid size must be a power of two, at least 8");
    return n;
}

// The fftw planner is a single global structure; executing plans is thread
// safe but creating or destroying them is not.  All plan management goes
// through this lock so transform contexts can be built from worker threads.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace detail

// Periodic scalar fields on [0, 2pi), nodal values at x_j = 2 pi j / n.
// Spectra are half-complex (modes k = 0..n/2) holding true Fourier
// coefficients: forward scales by 1/n, inverse is the bare conjugate-
// symmetric sum.
class Spectral1D {
  public:
    explicit Spectral1D(std::size_t n) : n_(detail::checked_grid_size(n)) {
        real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
        cplx_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * modes()));
        std::lock_guard<std::mutex> lock(detail::planner_mutex());
        fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, cplx_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), cplx_, real_, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw ConfigError("failed to create spectral transform plans");
    }
    ~Spectral1D() {
        std::lock_guard<std::mutex> lock(detail::planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(cplx_);
    }
    Spectral1D(const Spectral1D&) = delete;
    Spectral1D& operator=(const Spectral1D&) = delete;

    std::size_t size() const { return n_; }
    std::size_t modes() const { return n_ / 2 + 1; }
    std::size_t cutoff() const { return n_ / 3; } // 2/3-rule retained band

    void forward(const double* in, std::complex<double>* out) const {
        std::memcpy(real_, in, sizeof(double) * n_);
        fftw_execute(fwd_);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < modes(); ++k)
            out[k] = std::complex<double>(cplx_[k][0] * scale, cplx_[k][1] * scale);
    }

    void inverse(const std::complex<double>* in, double* out) const {
        for (std::size_t k = 0; k < modes(); ++k) {
            cplx_[k][0] = in[k].real();
            cplx_[k][1] = in[k].imag();
        }
        fftw_execute(bwd_);
        std::memcpy(out, real_, sizeof(double) * n_);
    }

    void derivative(std::complex<double>* c, std::size_t order = 1) const {
        for (std::size_t k = 0; k < modes(); ++k) {
            if (k == n_ / 2) {
                c[k] = 0.0; // odd-derivative ambiguity of the Nyquist mode
                continue;
            }
            for (std::size_t o = 0; o < order; ++o)
                c[k] *= std::complex<double>(0.0, static_cast<double>(k));
        }
    }

    void dealias(std::complex<double>* c) const {
        for (std::size_t k = cutoff() + 1; k < modes(); ++k) c[k] = 0.0;
    }

    std::vector<double> filter(const std::vector<double>& f) const {
        check(f);
        std::vector<std::complex<double>> c(modes());
        forward(f.data(), c.data());
        dealias(c.data());
        std::vector<double> out(n_);
        inverse(c.data(), out.data());
        return out;
    }

    std::vector<double> deriv(const std::vector<double>& f, std::size_t order = 1) const {
        check(f);
        std::vector<std::complex<double>> c(modes());
        forward(f.data(), c.data());
        derivative(c.data(), order);
        std::vector<double> out(n_);
        inverse(c.data(), out.data());
        return out;
    }

    // Pointwise product with the aliasing content removed; inputs are assumed
    // band-limited to the cutoff, so the result is alias-free.
    std::vector<double> multiply(const std::vector<double>& a,
                                 const std::vector<double>& b) const {
        check(a);
        check(b);
        std::vector<double> prod(n_);
        for (std::size_t j = 0; j < n_; ++j) prod[j] = a[j] * b[j];
        return filter(prod);
    }

    // Samples of the translated interpolant f(x - s).
    std::vector<double> shift(const std::vector<double>& f, double s) const {
        check(f);
        std::vector<std::complex<double>> c(modes());
        forward(f.data(), c.data());
        for (std::size_t k = 0; k < modes(); ++k)
            c[k] *= std::exp(std::complex<double>(0.0, -static_cast<double>(k) * s));
        c[n_ / 2] = 0.0; // shifted Nyquist mode of a real field is not representable
        std::vector<double> out(n_);
        inverse(c.data(), out.data());
        return out;
    }

    double mean(const std::vector<double>& f) const {
        check(f);
        double acc = 0.0;
        for (double v : f) acc += v;
        return acc / static_cast<double>(n_);
    }

    // Fraction of spectral energy sitting in the top third of the retained
    // band; the blow-up monitor for under-resolution.
    double tail_fraction(const std::vector<double>& f) const {
        check(f);
        std::vector<std::complex<double>> c(modes());
        forward(f.data(), c.data());
        double total = 0.0, tail = 0.0;
        const double lo = 2.0 * static_cast<double>(cutoff()) / 3.0;
        for (std::size_t k = 1; k < modes(); ++k) {
            double e = std::norm(c[k]);
            total += e;
            if (static_cast<double>(k) > lo) tail += e;
        }
        return total > 0.0 ? tail / total : 0.0;
    }

  private:
    void check(const std::vector<double>& f) const {
        if (f.size() != n_) throw ConfigError("field length does not match the grid");
    }

    std::size_t n_;
    double* real_;
    fftw_complex* cplx_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

// Periodic scalar fields on [0, 2pi)^2, nodal value of (x_i, y_j) stored at
// f[i * n + j].  Half-complex spectra are row-major n x (n/2 + 1) over
// (k1, k2) with k1 signed via the usual wrap and k2 = 0..n/2.
class Spectral2D {
  public:
    explicit Spectral2D(std::size_t n) : n_(detail::checked_grid_size(n)) {
        real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_ * n_));
        cplx_ = static_cast<fftw_complex*>(
            fftw_malloc(sizeof(fftw_complex) * n_ * (n_ / 2 + 1)));
        std::lock_guard<std::mutex> lock(detail::planner_mutex());
        fwd_ = fftw_plan_dft_r2c_2d(static_cast<int>(n_), static_cast<int>(n_), real_, cplx_,
                                    FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_2d(static_cast<int>(n_), static_cast<int>(n_), cplx_, real_,
                                    FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw ConfigError("failed to create spectral transform plans");
    }
    ~Spectral2D() {
        std::lock_guard<std::mutex> lock(detail::planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(cplx_);
        if (pad_plan_) fftw_destroy_plan(pad_plan_);
        if (pad_buf_) fftw_free(pad_buf_);
    }
    Spectral2D(const Spectral2D&) = delete;
    Spectral2D& operator=(const Spectral2D&) = delete;

    std::size_t size() const { return n_; }
    std::size_t points() const { return n_ * n_; }
    std::size_t modes() const { return n_ * (n_ / 2 + 1); }
    std::size_t cutoff() const { return n_ / 3; }

    int wave_x(std::size_t row) const {
        return row <= n_ / 2 ? static_cast<int>(row) : static_cast<int>(row) - static_cast<int>(n_);
    }

    void forward(const double* in, std::complex<double>* out) const {
        std::memcpy(real_, in, sizeof(double) * points());
        fftw_execute(fwd_);
        const double scale = 1.0 / static_cast<double>(points());
        for (std::size_t k = 0; k < modes(); ++k)
            out[k] = std::complex<double>(cplx_[k][0] * scale, cplx_[k][1] * scale);
    }

    void inverse(const std::complex<double>* in, double* out) const {
        for (std::size_t k = 0; k < modes(); ++k) {
            cplx_[k][0] = in[k].real();
            cplx_[k][1] = in[k].imag();
        }
        fftw_execute(bwd_);
        std::memcpy(out, real_, sizeof(double) * points());
    }

    void derivative_x(std::complex<double>* c) const { apply_wave(c, true); }
    void derivative_y(std::complex<double>* c) const { apply_wave(c, false); }

    void dealias(std::complex<double>* c) const {
        const std::size_t cols = n_ / 2 + 1;
        const int kc = static_cast<int>(cutoff());
        for (std::size_t i = 0; i < n_; ++i) {
            int k1 = wave_x(i);
            for (std::size_t j = 0; j < cols; ++j)
                if (std::abs(k1) > kc || static_cast<int>(j) > kc) c[i * cols + j] = 0.0;
        }
    }

    std::vector<double> filter(const std::vector<double>& f, bool pin_mean = false) const {
        check(f);
        std::vector<std::complex<double>> c(modes());
        forward(f.data(), c.data());
        dealias(c.data());
        if (pin_mean) c[0] = 0.0;
        std::vector<double> out(points());
        inverse(c.data(), out.data());
        return out;
    }

    std::vector<double> deriv_x(const std::vector<double>& f) const { return deriv(f, true); }
    std::vector<double> deriv_y(const std::vector<double>& f) const { return deriv(f, false); }

    std::vector<double> multiply(const std::vector<double>& a,
                                 const std::vector<double>& b) const {
        check(a);
        check(b);
        std::vector<double> prod(points());
        for (std::size_t j = 0; j < points(); ++j) prod[j] = a[j] * b[j];
        return filter(prod);
    }

    // Samples of f(x - sx, y - sy).
    std::vector<double> shift(const std::vector<double>& f, double sx, double sy) const {
        check(f);
        std::vector<std::complex<double>> c(modes());
        forward(f.data(), c.data());
        const std::size_t cols = n_ / 2 + 1;
        for (std::size_t i = 0; i < n_; ++i) {
            double k1 = static_cast<double>(wave_x(i));
            for (std::size_t j = 0; j < cols; ++j)
                c[i * cols + j] *=
                    std::exp(std::complex<double>(0.0, -(k1 * sx + static_cast<double>(j) * sy)));
        }
        // the shifted Nyquist content of a real field is not representable;
        // band-limited states carry none, so drop it
        std::fill(c.begin() + (n_ / 2) * cols, c.begin() + (n_ / 2 + 1) * cols, 0.0);
        for (std::size_t i = 0; i < n_; ++i) c[i * cols + n_ / 2] = 0.0;
        std::vector<double> out(points());
        inverse(c.data(), out.data());
        return out;
    }

    double mean(const std::vector<double>& f) const {
        check(f);
        double acc = 0.0;
        for (double v : f) acc += v;
        return acc / static_cast<double>(points());
    }

    double tail_fraction(const std::vector<double>& f) const {
        check(f);
        std::vector<std::complex<double>> c(modes());
        forward(f.data(), c.data());
        const std::size_t cols = n_ / 2 + 1;
        const double lo = 2.0 * static_cast<double>(cutoff()) / 3.0;
        double total = 0.0, tail = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            int k1 = wave_x(i);
            for (std::size_t j = 0; j < cols; ++j) {
                if (k1 == 0 && j == 0) continue;
                // interior columns represent both +k2 and -k2
                double mult = (j == 0 || j == n_ / 2) ? 1.0 : 2.0;
                double e = mult * std::norm(c[i * cols + j]);
                total += e;
                if (std::max(std::abs(k1), static_cast<int>(j)) > lo) tail += e;
            }
        }
        return total > 0.0 ? tail / total : 0.0;
    }

    // Exact samples of the trig interpolant on the doubled grid, for
    // quadrature of quartic quantities without aliasing.
    std::vector<double> upsample2(const std::vector<double>& f) {
        check(f);
        const std::size_t m = 2 * n_;
        if (!pad_plan_) {
            pad_buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m * m));
            std::lock_guard<std::mutex> lock(detail::planner_mutex());
            pad_plan_ = fftw_plan_dft_2d(static_cast<int>(m), static_cast<int>(m), pad_buf_,
                                         pad_buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
            if (!pad_plan_) throw ConfigError("failed to create upsampling plan");
        }
        std::vector<std::complex<double>> c(modes());
        forward(f.data(), c.data());
        const std::size_t cols = n_ / 2 + 1;
        for (std::size_t k = 0; k < m * m; ++k) pad_buf_[k][0] = pad_buf_[k][1] = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            int k1 = wave_x(i);
            if (std::abs(k1) >= static_cast<int>(n_ / 2)) continue;
            std::size_t row = k1 >= 0 ? static_cast<std::size_t>(k1)
                                      : m - static_cast<std::size_t>(-k1);
            for (std::size_t j = 0; j + 1 < cols; ++j) { // drop the Nyquist column
                std::complex<double> v = c[i * cols + j];
                pad_buf_[row * m + j][0] = v.real();
                pad_buf_[row * m + j][1] = v.imag();
                if (j > 0) { // conjugate partner at (-k1, -k2)
                    std::size_t ri = k1 > 0 ? m - static_cast<std::size_t>(k1)
                                            : static_cast<std::size_t>(-k1);
                    pad_buf_[ri * m + (m - j)][0] = v.real();
                    pad_buf_[ri * m + (m - j)][1] = -v.imag();
                }
            }
        }
        fftw_execute(pad_plan_);
        std::vector<double> out(m * m);
        for (std::size_t k = 0; k < m * m; ++k) out[k] = pad_buf_[k][0];
        return out;
    }

  private:
    void apply_wave(std::complex<double>* c, bool along_x) const {
        const std::size_t cols = n_ / 2 + 1;
        for (std::size_t i = 0; i < n_; ++i) {
            int k1 = wave_x(i);
            for (std::size_t j = 0; j < cols; ++j) {
                if (i == n_ / 2 || j == n_ / 2) {
                    c[i * cols + j] = 0.0; // Nyquist content dropped under d/dx
                    continue;
                }
                double k = along_x ? static_cast<double>(k1) : static_cast<double>(j);
                c[i * cols + j] *= std::complex<double>(0.0, k);
            }
        }
    }

    std::vector<double> deriv(const std::vector<double>& f, bool along_x) const {
        check(f);
        std::vector<std::complex<double>> c(modes());
        forward(f.data(), c.data());
        apply_wave(c.data(), along_x);
        std::vector<double> out(points());
        inverse(c.data(), out.data());
        return out;
    }

    void check(const std::vector<double>& f) const {
        if (f.size() != points()) throw ConfigError("field length does not match the grid");
    }

    std::size_t n_;
    double* real_;
    fftw_complex* cplx_;
    fftw_plan fwd_;
    fftw_plan bwd_;
    fftw_complex* pad_buf_ = nullptr;
    fftw_plan pad_plan_ = nullptr;
};

} // namespace roughflow
