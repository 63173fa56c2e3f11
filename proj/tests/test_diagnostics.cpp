#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "roughflow/core/gaussian.hpp"
#include "roughflow/core/lifts.hpp"
#include "roughflow/diagnostics/audit.hpp"
#include "roughflow/diagnostics/lie_chain.hpp"
#include "roughflow/diagnostics/loops.hpp"
#include "roughflow/diagnostics/sampler.hpp"
#include "roughflow/diagnostics/wong_zakai.hpp"
#include "roughflow/fluid/models2d.hpp"

using namespace roughflow;

namespace {

const double PI = std::acos(-1.0);

template <class F> std::vector<double> sample(std::size_t n, F&& f) {
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out[i * n + j] = f(2.0 * PI * i / n, 2.0 * PI * j / n);
    return out;
}

std::vector<double> taylor_green(std::size_t n) {
    return sample(n, [](double x, double y) { return 2.0 * std::cos(x) * std::cos(y); });
}

RoughFieldSet2D constant_fields(const Spectral2D& sp, double a, double b) {
    std::vector<double> flat(2 * sp.points());
    std::fill(flat.begin(), flat.begin() + sp.points(), a);
    std::fill(flat.begin() + sp.points(), flat.end(), b);
    return make_rough_fields_2d(sp, std::move(flat), 1, true);
}

double fit_slope(const std::vector<double>& mesh, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = mesh.size();
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::log(mesh[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

GeometricRoughPath smooth_driver_2(std::size_t intervals, double T) {
    auto g = TimeGrid::uniform(0.0, T, intervals);
    std::vector<double> z(2 * g.points());
    for (std::size_t i = 0; i < g.points(); ++i) {
        z[2 * i] = std::sin(g.t[i]);
        z[2 * i + 1] = std::cos(2.0 * g.t[i]) - 1.0;
    }
    return lift_piecewise_linear(g, std::move(z), 2, 1.0);
}

VectorFieldFamily planar_noise_fields() {
    VectorFieldFamily f;
    f.dim = 2;
    f.num_rough = 2;
    f.rough = [](std::size_t k, const double* x, double* out) {
        if (k == 0) {
            out[0] = std::sin(x[1]);
            out[1] = 0.3 * x[0];
        } else {
            out[0] = 0.2 * x[1] * x[1];
            out[1] = std::cos(x[0]);
        }
    };
    f.rough_jacobian = [](std::size_t k, const double* x, double* j) {
        if (k == 0) {
            j[0] = 0.0;
            j[1] = std::cos(x[1]);
            j[2] = 0.3;
            j[3] = 0.0;
        } else {
            j[0] = 0.0;
            j[1] = 0.4 * x[1];
            j[2] = -std::sin(x[0]);
            j[3] = 0.0;
        }
    };
    return f;
}

} // namespace

TEST_CASE("off-grid sampling of band-limited fields is exact") {
    Spectral2D sp(32);
    auto f = sample(32, [](double x, double y) {
        return 0.3 + std::sin(2.0 * x) * std::cos(3.0 * y) + 0.5 * std::cos(x);
    });
    auto s = SpectralSampler2D::from_field(sp, f);

    SECTION("grid points reproduce the samples") {
        for (std::size_t i = 0; i < 32; i += 5)
            for (std::size_t j = 0; j < 32; j += 7)
                CHECK(std::abs(s.value(2.0 * PI * i / 32, 2.0 * PI * j / 32) - f[i * 32 + j]) <
                      1e-12);
    }

    SECTION("arbitrary points match the analytic field and gradient") {
        for (double x : {0.123, 2.71, 5.9}) {
            for (double y : {0.77, 3.33, 6.1}) {
                double v, gx, gy;
                s.value_and_gradient(x, y, &v, &gx, &gy);
                double truth = 0.3 + std::sin(2.0 * x) * std::cos(3.0 * y) + 0.5 * std::cos(x);
                CHECK(std::abs(v - truth) < 1e-12);
                CHECK(std::abs(gx - (2.0 * std::cos(2.0 * x) * std::cos(3.0 * y) -
                                     0.5 * std::sin(x))) < 1e-11);
                CHECK(std::abs(gy - (-3.0 * std::sin(2.0 * x) * std::sin(3.0 * y))) < 1e-11);
            }
        }
    }
}

TEST_CASE("velocity history interpolates snapshots in time") {
    Spectral2D sp(32);
    VelocityHistory hist;
    auto w0 = sample(32, [](double x, double) { return std::cos(x); });
    auto w1 = sample(32, [](double x, double) { return 2.0 * std::cos(x); });
    hist.record(sp, w0, 0.0);
    hist.record(sp, w1, 1.0);

    double u[2];
    hist.velocity(0.25, 1.3, 2.1, u); // vorticity cos x moves (0, sin x)
    CHECK(std::abs(u[0]) < 1e-13);
    CHECK(std::abs(u[1] - 1.25 * std::sin(1.3)) < 1e-12);
    hist.velocity(-5.0, 1.3, 2.1, u); // clamped to the first snapshot
    CHECK(std::abs(u[1] - std::sin(1.3)) < 1e-12);
    hist.velocity(7.0, 1.3, 2.1, u);
    CHECK(std::abs(u[1] - 2.0 * std::sin(1.3)) < 1e-12);

    CHECK_THROWS_AS(hist.record(sp, w0, 0.5), ConfigError); // time went backwards
}

TEST_CASE("material loops validate their shape") {
    auto loop = circle_loop(PI, PI, 0.7, 64);
    CHECK(loop.size() == 64);
    loop.validate();

    MaterialLoop bad;
    bad.pts = {0.0, 0.0, 1.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.pts = {0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("circulation quadrature") {
    SECTION("zero velocity and gradient fields circulate nothing") {
        auto loop = circle_loop(2.0, 3.0, 0.6, 64);
        double c0 = circulation(loop.pts.data(), loop.size(),
                                [](double, double, double* u) { u[0] = u[1] = 0.0; });
        CHECK(c0 == 0.0);

        auto grad_vel = [](double x, double y, double* u) {
            u[0] = std::cos(x) * std::cos(y); // gradient of sin x cos y
            u[1] = -std::sin(x) * std::sin(y);
        };
        auto fine = circle_loop(2.0, 3.0, 0.6, 256);
        double c64 = circulation(loop.pts.data(), loop.size(), grad_vel);
        double c256 = circulation(fine.pts.data(), fine.size(), grad_vel);
        INFO("gradient-field circulation " << c64 << " -> " << c256);
        CHECK(std::abs(c64) < 2e-3);
        CHECK(std::abs(c256) < 2e-4);
    }

    SECTION("cellular velocity against a fine parametric oracle") {
        auto vel = [](double x, double y, double* u) {
            u[0] = -std::cos(x) * std::sin(y);
            u[1] = std::sin(x) * std::cos(y);
        };
        double cx = 0.3, cy = 0.4, r = 0.8;
        double oracle = 0.0;
        const std::size_t fine = 4096;
        for (std::size_t i = 0; i < fine; ++i) {
            double s = 2.0 * PI * i / fine;
            double u[2];
            vel(cx + r * std::cos(s), cy + r * std::sin(s), u);
            oracle += (-u[0] * std::sin(s) + u[1] * std::cos(s)) * r;
        }
        oracle *= 2.0 * PI / fine;
        REQUIRE(std::abs(oracle) > 0.1);

        auto loop = circle_loop(cx, cy, r, 512);
        double got = circulation(loop.pts.data(), loop.size(), vel);
        CHECK(std::abs(got - oracle) < 1e-3 * std::abs(oracle));
    }

    SECTION("a loop around the stagnation saddle encloses no net vorticity") {
        auto vel = [](double x, double y, double* u) {
            u[0] = -std::cos(x) * std::sin(y);
            u[1] = std::sin(x) * std::cos(y);
        };
        auto loop = circle_loop(PI / 2.0, PI / 2.0, 0.5, 256);
        CHECK(std::abs(circulation(loop.pts.data(), loop.size(), vel)) < 1e-6);
    }
}

TEST_CASE("loop advection through recorded flows") {
    Spectral2D sp(32);

    SECTION("still fluid leaves the loop alone") {
        VelocityHistory hist;
        std::vector<double> zero(sp.points(), 0.0);
        hist.record(sp, zero, 0.0);
        hist.record(sp, zero, 1.0);
        auto none = constant_fields(sp, 0.0, 0.0);
        auto fam = advection_family(hist, sp, none);
        auto path = std::make_shared<const GeometricRoughPath>(
            lift_sampled([](double, double* z) { z[0] = 0.0; }, 1,
                         TimeGrid::uniform(0.0, 1.0, 16), 1.0));
        auto loop = circle_loop(PI, PI, 0.7, 32);
        auto flow = advect_loop(loop, fam, path);
        auto moved = loop_at(flow, 16);
        for (std::size_t i = 0; i < loop.pts.size(); ++i)
            CHECK(std::abs(moved.pts[i] - loop.pts[i]) < 1e-14);
    }

    SECTION("steady shear moves vertices by their own closed form") {
        VelocityHistory hist;
        auto w = sample(32, [](double, double y) { return -std::cos(y); }); // u = (sin y, 0)
        hist.record(sp, w, 0.0);
        hist.record(sp, w, 1.0);
        auto none = constant_fields(sp, 0.0, 0.0);
        auto fam = advection_family(hist, sp, none);
        auto path = std::make_shared<const GeometricRoughPath>(
            lift_sampled([](double, double* z) { z[0] = 0.0; }, 1,
                         TimeGrid::uniform(0.0, 1.0, 64), 1.0));
        auto loop = circle_loop(PI, PI, 0.9, 24);
        auto flow = advect_loop(loop, fam, path);
        auto moved = loop_at(flow, 64);
        moved.validate(); // still a closed, nondegenerate loop
        for (std::size_t i = 0; i < loop.size(); ++i) {
            double x0 = loop.pts[2 * i], y0 = loop.pts[2 * i + 1];
            CHECK(std::abs(moved.pts[2 * i] - (x0 + std::sin(y0))) < 1e-12);
            CHECK(std::abs(moved.pts[2 * i + 1] - y0) < 1e-13);
        }
    }

    SECTION("constant noise translates the loop verbatim") {
        VelocityHistory hist;
        std::vector<double> zero(sp.points(), 0.0);
        hist.record(sp, zero, 0.0);
        hist.record(sp, zero, 1.0);
        auto fields = constant_fields(sp, 0.4, -0.7);
        auto fam = advection_family(hist, sp, fields);
        auto g = TimeGrid::uniform(0.0, 1.0, 32);
        std::vector<double> z(g.points());
        for (std::size_t i = 0; i < g.points(); ++i) z[i] = std::sin(g.t[i]);
        auto path = std::make_shared<const GeometricRoughPath>(
            lift_piecewise_linear(g, std::move(z), 1, 1.0));
        auto loop = circle_loop(2.0, 2.0, 0.5, 16);
        auto flow = advect_loop(loop, fam, path);
        double dZ = std::sin(1.0);
        auto moved = loop_at(flow, 32);
        for (std::size_t i = 0; i < loop.size(); ++i) {
            CHECK(std::abs(moved.pts[2 * i] - (loop.pts[2 * i] + 0.4 * dZ)) < 1e-12);
            CHECK(std::abs(moved.pts[2 * i + 1] - (loop.pts[2 * i + 1] - 0.7 * dZ)) < 1e-12);
        }
    }
}

TEST_CASE("circulation is conserved along a noisy cellular run") {
    const std::size_t n = 32, M = 128;
    const double T = 0.5;
    Spectral2D sp(n);
    auto omega = taylor_green(n);
    auto fields = constant_fields(sp, 0.05, 0.04);

    auto g = TimeGrid::uniform(0.0, T, M);
    std::vector<double> z(g.points());
    for (std::size_t i = 0; i < g.points(); ++i) z[i] = std::sin(g.t[i]);
    auto path = std::make_shared<const GeometricRoughPath>(
        lift_piecewise_linear(g, std::move(z), 1, 1.0));

    VelocityHistory hist;
    hist.record(sp, omega, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        step_rough_pde(sp, omega, fields, *path, i);
        hist.record(sp, omega, g.t[i + 1]);
    }

    auto fam = advection_family(hist, sp, fields);
    auto loop = circle_loop(0.3, 0.4, 0.8, 128);
    auto flow = advect_loop(loop, fam, path);
    auto series = circulation_series(flow, hist);

    REQUIRE(series.size() == M + 1);
    REQUIRE(std::abs(series[0]) > 0.05);
    double drift = 0.0;
    for (double c : series) drift = std::max(drift, std::abs(c - series[0]));
    INFO("initial circulation " << series[0] << ", max drift " << drift);
    CHECK(drift / std::abs(series[0]) < 1e-3);
}

TEST_CASE("scalar transport identity along rough flows") {
    SECTION("constant scalars have zero residual") {
        auto f = planar_noise_fields();
        auto path = std::make_shared<const GeometricRoughPath>(smooth_driver_2(64, 0.8));
        auto flow = solve_flow(f, path, {0.2, -0.3}, StepScheme::davie);
        SyntheticScalar syn;
        syn.a = [](const double*) { return 5.0; };
        CHECK(lie_chain_rule_residual(flow, syn) < 1e-14);
    }

    SECTION("a linear scalar advected by constant fields closes exactly") {
        VectorFieldFamily f;
        f.dim = 2;
        f.num_rough = 1;
        f.drift = [](double, const double*, double* out) {
            out[0] = 0.3;
            out[1] = -0.2;
        };
        f.rough = [](std::size_t, const double*, double* out) {
            out[0] = 0.5;
            out[1] = 0.1;
        };
        f.rough_jacobian = [](std::size_t, const double*, double* j) {
            std::fill(j, j + 4, 0.0);
        };
        auto g = TimeGrid::uniform(0.0, 1.0, 32);
        std::vector<double> z(g.points());
        for (std::size_t i = 0; i < g.points(); ++i) z[i] = std::sin(2.0 * g.t[i]);
        auto path = std::make_shared<const GeometricRoughPath>(
            lift_piecewise_linear(g, std::move(z), 1, 1.0));
        auto flow = solve_flow(f, path, {0.7, 1.1}, StepScheme::davie);

        // tau advected by the flow: v.x - v.U t - v.xi Z(t)
        SyntheticScalar syn;
        syn.a = [](const double* x) { return x[0] + 2.0 * x[1]; };
        syn.grad_a = [](const double*, double* gr) {
            gr[0] = 1.0;
            gr[1] = 2.0;
        };
        syn.b = [](const double*) { return -(0.3 - 2.0 * 0.2); };
        syn.grad_b = [](const double*, double* gr) { gr[0] = gr[1] = 0.0; };
        syn.phi = [](double t) { return t; };
        syn.dphi = [](double) { return 1.0; };
        syn.c = {[](const double*) { return -(0.5 + 2.0 * 0.1); }};
        syn.grad_c = {[](const double*, double* gr) { gr[0] = gr[1] = 0.0; }};
        syn.hess_c = {[](const double*, double* h) { std::fill(h, h + 4, 0.0); }};
        CHECK(lie_chain_rule_residual(flow, syn) < 1e-12);
    }

    SECTION("generic analytic scalar: residual vanishes at the sewing rate") {
        auto f = planar_noise_fields();
        f.drift = [](double t, const double* x, double* out) {
            out[0] = 0.1 * x[1] + 0.05 * std::sin(t);
            out[1] = -0.1 * x[0];
        };

        SyntheticScalar syn;
        syn.a = [](const double* x) { return std::sin(x[0]) + 0.5 * x[1] * x[1]; };
        syn.grad_a = [](const double* x, double* gr) {
            gr[0] = std::cos(x[0]);
            gr[1] = x[1];
        };
        syn.hess_a = [](const double* x, double* h) {
            h[0] = -std::sin(x[0]);
            h[1] = h[2] = 0.0;
            h[3] = 1.0;
        };
        syn.b = [](const double* x) { return std::cos(x[0] + x[1]); };
        syn.grad_b = [](const double* x, double* gr) {
            gr[0] = gr[1] = -std::sin(x[0] + x[1]);
        };
        syn.hess_b = [](const double* x, double* h) {
            double c = -std::cos(x[0] + x[1]);
            h[0] = h[1] = h[2] = h[3] = c;
        };
        syn.phi = [](double t) { return std::sin(2.0 * t); };
        syn.dphi = [](double t) { return 2.0 * std::cos(2.0 * t); };
        syn.c = {[](const double* x) { return x[0] * x[1]; },
                 [](const double* x) { return std::sin(x[1]); }};
        syn.grad_c = {[](const double* x, double* gr) {
                          gr[0] = x[1];
                          gr[1] = x[0];
                      },
                      [](const double* x, double* gr) {
                          gr[0] = 0.0;
                          gr[1] = std::cos(x[1]);
                      }};
        syn.hess_c = {[](const double*, double* h) {
                          h[0] = h[3] = 0.0;
                          h[1] = h[2] = 1.0;
                      },
                      [](const double* x, double* h) {
                          h[0] = h[1] = h[2] = 0.0;
                          h[3] = -std::sin(x[1]);
                      }};

        std::vector<double> mesh, res;
        for (std::size_t m : {32, 64, 128, 256}) {
            auto path = std::make_shared<const GeometricRoughPath>(smooth_driver_2(m, 0.8));
            auto flow = solve_flow(f, path, {0.2, -0.3, 1.1, 0.5}, StepScheme::davie);
            mesh.push_back(0.8 / static_cast<double>(m));
            res.push_back(lie_chain_rule_residual(flow, syn));
        }
        INFO("transport residuals " << res[0] << " " << res[1] << " " << res[2] << " "
                                    << res[3]);
        CHECK(res[3] < res[0]);
        double slope = fit_slope(mesh, res);
        INFO("slope " << slope);
        CHECK(slope > 1.7);
    }
}

TEST_CASE("mollification ladders and their failure mode") {
    auto scalar_exp_solver = [](const GeometricRoughPath& p) {
        auto fields = linear_rough_fields(1, {{1.0}});
        auto flow = solve_flow(fields, std::make_shared<const GeometricRoughPath>(p), {1.0},
                               StepScheme::davie);
        return std::vector<double>{flow.position(p.points() - 1, 0)[0]};
    };

    SECTION("fewer than three levels is refused") {
        std::vector<GeometricRoughPath> two;
        two.push_back(smooth_driver_2(8, 1.0));
        two.push_back(smooth_driver_2(16, 1.0));
        CHECK_THROWS_AS(wong_zakai_report(two, [](const GeometricRoughPath& p) {
                            return std::vector<double>{p.value(0, 0)};
                        }),
                        ConfigError);
    }

    SECTION("constant sections cannot see the mollification level") {
        std::vector<GeometricRoughPath> levels;
        for (std::size_t m : {8, 16, 32}) {
            auto g = TimeGrid::uniform(0.0, 1.0, m);
            std::vector<double> z(g.points());
            for (std::size_t i = 0; i < g.points(); ++i) z[i] = std::sin(g.t[i]);
            levels.push_back(lift_piecewise_linear(g, std::move(z), 1, 1.0));
        }
        auto rep = wong_zakai_report(levels, [](const GeometricRoughPath& p) {
            auto fields = constant_rough_fields(1, {{0.7}});
            auto flow = solve_flow(fields, std::make_shared<const GeometricRoughPath>(p),
                                   {0.0}, StepScheme::davie);
            return std::vector<double>{flow.position(p.points() - 1, 0)[0]};
        });
        for (double dist : rep.successive) CHECK(dist < 1e-14);
    }

    SECTION("smooth drivers settle monotonically onto the exponential") {
        std::vector<GeometricRoughPath> levels;
        for (std::size_t m : {8, 16, 32, 64, 128}) {
            auto g = TimeGrid::uniform(0.0, 1.0, m);
            std::vector<double> z(g.points());
            for (std::size_t i = 0; i < g.points(); ++i) z[i] = std::sin(g.t[i]);
            levels.push_back(lift_piecewise_linear(g, std::move(z), 1, 1.0));
        }
        auto rep = wong_zakai_report(levels, scalar_exp_solver);
        CHECK(rep.monotone);
        CHECK(rep.successive.back() < 1e-4);
        double final_value = scalar_exp_solver(levels.back())[0];
        CHECK(std::abs(final_value - std::exp(std::sin(1.0))) < 1e-4);
    }

    SECTION("one-dimensional lifts carry no level information") {
        // over any span, geometricity forces the second level of a scalar
        // path to (dZ)^2 / 2, so once each level is brought back to the
        // output grid the levels coincide and the ladder is flat
        GaussianSpec gs;
        gs.hurst = 0.45;
        gs.dim = 1;
        gs.seed = 1;
        gs.fine_resolution = 4;
        auto levels = lift_gaussian_levels(gs, TimeGrid::uniform(0.0, 1.0, 8), 5);
        auto rep = wong_zakai_report(levels, scalar_exp_solver);
        for (double dist : rep.successive) CHECK(dist < 1e-13);
    }

    SECTION("noncommuting planar fields resolve the ladder and expose corruption") {
        GaussianSpec gs;
        gs.hurst = 0.45;
        gs.dim = 2;
        gs.seed = 1;
        gs.fine_resolution = 4;
        auto levels = lift_gaussian_levels(gs, TimeGrid::uniform(0.0, 1.0, 8), 5);
        auto matrix_solver = [](const GeometricRoughPath& p) {
            // A1 projects, A2 swaps; [A1, A2] != 0 so the area matters
            auto fields = linear_rough_fields(2, {{1.0, 0.0, 0.0, 0.0},
                                                  {0.0, 1.0, 1.0, 0.0}});
            auto flow = solve_flow(fields, std::make_shared<const GeometricRoughPath>(p),
                                   {1.0, 0.0}, StepScheme::davie);
            const double* yT = flow.position(p.points() - 1, 0);
            return std::vector<double>{yT[0], yT[1]};
        };
        auto rep = wong_zakai_report(levels, matrix_solver);
        INFO("area ladder distances " << rep.successive.front() << " .. "
                                      << rep.successive.back());
        CHECK(rep.successive.back() < rep.successive.front());

        auto corrupted = matrix_solver(antisymmetrize_second_level(levels.back()));
        auto geometric = matrix_solver(levels.back());
        double gap = solution_distance(corrupted, geometric);
        INFO("corrupted-vs-geometric gap " << gap);
        CHECK(gap > 5.0 * rep.successive.back());
    }
}

TEST_CASE("invariant series bookkeeping and audits") {
    InvariantSeries series;
    series.names = {"enstrophy", "energy"};
    series.append(0.0, {4.0, 2.0});
    series.append(0.5, {4.2, 2.1});
    series.append(1.0, {3.9, 1.9});
    series.validate();

    SECTION("rows must match the declared channels") {
        CHECK_THROWS_AS(series.append(1.5, {1.0}), ConfigError);
    }

    SECTION("non-finite samples are rejected") {
        InvariantSeries bad;
        bad.names = {"x"};
        bad.append(0.0, {std::nan("")});
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    SECTION("drift arithmetic and the report shape") {
        auto a = audit_channel(series, "enstrophy", 0.1);
        CHECK(a.initial == 4.0);
        CHECK(a.final_value == 3.9);
        CHECK(a.max_abs_drift == Catch::Approx(0.2).margin(1e-15)); // vs the initial value
        CHECK(a.relative_drift == Catch::Approx(0.05).margin(1e-15));
        CHECK(a.pass);
        auto fail = audit_channel(series, "enstrophy", 0.04);
        CHECK_FALSE(fail.pass);

        auto audits = audit_series(series, {{"enstrophy", 0.1}, {"energy", 0.01}});
        auto j = audit_to_json(audits);
        CHECK(j["invariants"]["enstrophy"]["pass"].get<bool>());
        CHECK_FALSE(j["invariants"]["energy"]["pass"].get<bool>());
        CHECK_FALSE(j["pass"].get<bool>());
        CHECK(j["invariants"]["energy"]["initial"].get<double>() == 2.0);
    }

    SECTION("vorticity moments share the stepping code's quadratures") {
        Spectral2D sp(32);
        auto w = sample(32, [](double x, double y) {
            return 2.0 * std::cos(x) * std::cos(y) + 0.3 * std::cos(2.0 * x + y);
        });
        auto m = enstrophy_casimirs(sp, w);
        auto inv = measure_invariants_2d(sp, w, 0.0);
        CHECK(m.enstrophy == inv.enstrophy);
        CHECK(m.casimir4 == inv.casimir4);
        CHECK(m.total == inv.mean_omega * 4.0 * PI * PI);
        auto zero = enstrophy_casimirs(sp, std::vector<double>(sp.points(), 0.0));
        CHECK(zero.enstrophy == 0.0);
        CHECK(zero.casimir4 == 0.0);
        CHECK(zero.total == 0.0);
    }
}
