#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "roughflow/diagnostics/sampler.hpp"
#include "roughflow/flow/rde.hpp"

namespace roughflow {

// Closed material polyline on the torus: M ordered vertices, the last edge
// connecting back to the first.  Vertices live on the universal cover while
// advected, so edges crossing the periodic seam stay short.
struct MaterialLoop {
    std::vector<double> pts; // M x 2

    std::size_t size() const { return pts.size() / 2; }

    void validate() const {
        const std::size_t m = size();
        if (m < 3 || pts.size() != 2 * m)
            throw ConfigError("material loop: need at least three vertices");
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t j = (i + 1) % m;
            double dx = pts[2 * j] - pts[2 * i], dy = pts[2 * j + 1] - pts[2 * i + 1];
            if (std::sqrt(dx * dx + dy * dy) < 1e-12)
                throw ConfigError("material loop: repeated consecutive vertices");
        }
    }
};

inline MaterialLoop circle_loop(double cx, double cy, double radius, std::size_t m) {
    const double two_pi = 2.0 * std::acos(-1.0);
    MaterialLoop loop;
    loop.pts.resize(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        double s = two_pi * static_cast<double>(i) / static_cast<double>(m);
        loop.pts[2 * i] = cx + radius * std::cos(s);
        loop.pts[2 * i + 1] = cy + radius * std::sin(s);
    }
    loop.validate();
    return loop;
}

// Line integral of a velocity field along the closed polyline: per edge, the
// average of the endpoint velocities dotted with the chord.
template <class VelFn>
double circulation(const double* pts, std::size_t m, VelFn&& vel) {
    if (m < 3) throw ConfigError("circulation: need at least three vertices");
    std::vector<double> u(2 * m);
    for (std::size_t i = 0; i < m; ++i) vel(pts[2 * i], pts[2 * i + 1], u.data() + 2 * i);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = (i + 1) % m;
        double ex = pts[2 * j] - pts[2 * i], ey = pts[2 * j + 1] - pts[2 * i + 1];
        acc += 0.5 * ((u[2 * i] + u[2 * j]) * ex + (u[2 * i + 1] + u[2 * j + 1]) * ey);
    }
    return acc;
}

inline double circulation(const MaterialLoop& loop, const VelocityHistory& hist, double t) {
    loop.validate();
    return circulation(loop.pts.data(), loop.size(), [&](double x, double y, double* out) {
        hist.velocity(t, x, y, out);
    });
}

// Push the loop vertices through the rough flow built from the recorded
// velocity and the run's noise fields.  The returned flow map holds the
// advected loop at every driver grid time.
inline FlowMap advect_loop(const MaterialLoop& loop, const VectorFieldFamily& family,
                           std::shared_ptr<const GeometricRoughPath> path,
                           StepScheme scheme = StepScheme::davie,
                           const SolveOptions& opt = {}) {
    loop.validate();
    return solve_flow(family, std::move(path), loop.pts, scheme, opt);
}

inline MaterialLoop loop_at(const FlowMap& flow, std::size_t time_index) {
    MaterialLoop loop;
    loop.pts.resize(flow.num_particles * 2);
    for (std::size_t i = 0; i < flow.num_particles; ++i) {
        const double* x = flow.position(time_index, i);
        loop.pts[2 * i] = x[0];
        loop.pts[2 * i + 1] = x[1];
    }
    return loop;
}

// Kelvin audit channel: circulation of the recorded velocity around the
// advected loop at every snapshot time.
inline std::vector<double> circulation_series(const FlowMap& flow,
                                              const VelocityHistory& hist) {
    const std::size_t nt = flow.path->points();
    if (hist.snapshots() != nt)
        throw ConfigError("circulation series: history and driver grids disagree");
    std::vector<double> out(nt);
    for (std::size_t i = 0; i < nt; ++i)
        out[i] = circulation(loop_at(flow, i), hist, hist.times[i]);
    return out;
}

} // namespace roughflow
