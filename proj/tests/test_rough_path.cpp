#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "roughflow/core/gaussian.hpp"
#include "roughflow/core/lifts.hpp"
#include "roughflow/core/rough_path.hpp"

using namespace roughflow;

namespace {

// Composite Simpson oracle for int_a^b f(s) ds, independent of the library
// quadrature machinery.
template <class F> double simpson(F&& f, double a, double b, std::size_t panels) {
    double h = (b - a) / static_cast<double>(panels);
    double acc = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * h / 3.0;
}

// Midpoint Riemann-Stieltjes oracle for the second level of a piecewise
// linear path: exact per linear piece, so exact overall up to round-off.
std::vector<double> pl_second_level_oracle(const std::vector<double>& ts,
                                           const std::vector<std::vector<double>>& zs,
                                           std::size_t sub) {
    std::size_t K = zs[0].size();
    std::vector<double> zz(K * K, 0.0);
    std::vector<double> z0 = zs[0];
    for (std::size_t seg = 0; seg + 1 < ts.size(); ++seg) {
        for (std::size_t j = 0; j < sub; ++j) {
            double w0 = (j + 0.5) / static_cast<double>(sub);
            for (std::size_t l = 0; l < K; ++l) {
                double zmid = zs[seg][l] + w0 * (zs[seg + 1][l] - zs[seg][l]);
                for (std::size_t k = 0; k < K; ++k) {
                    double dz = (zs[seg + 1][k] - zs[seg][k]) / static_cast<double>(sub);
                    zz[l * K + k] += (zmid - z0[l]) * dz;
                }
            }
        }
    }
    return zz;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("smooth lift of (t, t^2) reproduces the monomial second level") {
    PathFn z = [](double t, double* out) {
        out[0] = t;
        out[1] = t * t;
    };
    PathFn zdot = [](double t, double* out) {
        out[0] = 1.0;
        out[1] = 2.0 * t;
    };

    // Independent quadrature check of the closed forms before freezing them.
    double o12 = simpson([](double s) { return s * 2.0 * s; }, 0.0, 1.0, 1 << 10);
    double o21 = simpson([](double s) { return s * s; }, 0.0, 1.0, 1 << 10);
    REQUIRE(std::abs(o12 - 2.0 / 3.0) < 1e-12);
    REQUIRE(std::abs(o21 - 1.0 / 3.0) < 1e-12);

    auto path = lift_smooth(z, zdot, 2, TimeGrid::uniform(0.0, 1.0, 1));
    const double* zz = path.block(0);
    CHECK(std::abs(zz[0] - 0.5) < 1e-10);       // int s ds
    CHECK(std::abs(zz[1] - 2.0 / 3.0) < 1e-10); // int s d(s^2)
    CHECK(std::abs(zz[2] - 1.0 / 3.0) < 1e-10); // int s^2 ds
    CHECK(std::abs(zz[3] - 0.5) < 1e-10);       // int s^2 d(s^2)

    // zz^{12} + zz^{21} = dZ^1 dZ^2 is the symmetric shuffle identity.
    CHECK(std::abs(zz[1] + zz[2] - 1.0) < 1e-12);
    CHECK(path.chen_residual() < 1e-12);
    CHECK(path.geometricity_residual() < 1e-12);
}

TEST_CASE("smooth lift of the unit circle captures the enclosed area") {
    PathFn z = [](double t, double* out) {
        out[0] = std::cos(t);
        out[1] = std::sin(t);
    };
    PathFn zdot = [](double t, double* out) {
        out[0] = -std::sin(t);
        out[1] = std::cos(t);
    };

    // Green's-theorem oracle: shoelace area of a dense inscribed polygon.
    std::size_t m = 1 << 14;
    double area = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double a = 2.0 * M_PI * i / m, b = 2.0 * M_PI * (i + 1) / m;
        area += 0.5 * (std::cos(a) * std::sin(b) - std::cos(b) * std::sin(a));
    }
    REQUIRE(std::abs(area - M_PI) < 1e-6);

    SECTION("single interval, high quadrature order") {
        auto path = lift_smooth(z, zdot, 2, TimeGrid::uniform(0.0, 2.0 * M_PI, 1), 1.0, 32);
        std::vector<double> dz(2), la(4);
        path.increment(0, 1, dz.data());
        CHECK(std::abs(dz[0]) < 1e-12);
        CHECK(std::abs(dz[1]) < 1e-12);
        path.levy_area(0, 1, la.data());
        CHECK(std::abs(la[1] - M_PI) < 1e-10); // A^{12} = pi
        CHECK(std::abs(la[1] - area) < 1e-5);  // against the polygon oracle
        CHECK(std::abs(la[2] + M_PI) < 1e-10);
    }

    SECTION("many intervals, default order, area assembled through Chen") {
        auto path = lift_smooth(z, zdot, 2, TimeGrid::uniform(0.0, 2.0 * M_PI, 64));
        std::vector<double> la(4);
        path.levy_area(0, path.points() - 1, la.data());
        CHECK(std::abs(la[1] - M_PI) < 1e-10);
    }

    SECTION("finite-difference fallback derivative stays within budget") {
        auto path = lift_smooth(z, PathFn{}, 2, TimeGrid::uniform(0.0, 2.0 * M_PI, 64));
        std::vector<double> la(4);
        path.levy_area(0, path.points() - 1, la.data());
        CHECK(std::abs(la[1] - M_PI) < 1e-9);
        CHECK(path.geometricity_residual() < 1e-10);
    }
}

TEST_CASE("quadrature non-convergence is flagged") {
    // One Gauss-Legendre panel of order 4 across a full oscillation cannot
    // resolve the area integrand; the geometricity check must catch it.
    PathFn z = [](double t, double* out) {
        out[0] = std::cos(3.0 * t);
        out[1] = std::sin(3.0 * t);
    };
    CHECK_THROWS_AS(lift_smooth(z, PathFn{}, 2, TimeGrid::uniform(0.0, 2.0 * M_PI, 1), 1.0, 4),
                    NumericalAbort);
}

TEST_CASE("piecewise-linear lift is chord-exact") {
    SECTION("single segment has no area") {
        std::vector<double> vals = {0.0, 0.0, 0.3, -0.2};
        auto path = lift_piecewise_linear(TimeGrid::uniform(0.0, 1.0, 1), vals, 2, 1.0);
        const double* zz = path.block(0);
        CHECK(zz[0] == Catch::Approx(0.5 * 0.3 * 0.3).margin(1e-15));
        CHECK(zz[1] == Catch::Approx(0.5 * 0.3 * (-0.2)).margin(1e-15));
        CHECK(zz[2] == Catch::Approx(0.5 * (-0.2) * 0.3).margin(1e-15));
        CHECK(zz[3] == Catch::Approx(0.5 * 0.2 * 0.2).margin(1e-15));
        std::vector<double> la(4);
        path.levy_area(0, 1, la.data());
        CHECK(std::abs(la[1]) < 1e-15);
    }

    SECTION("two segments merge by the Chen formula") {
        // a then b: zz_{02} = a(x)a/2 + b(x)b/2 + a(x)b
        double ax = 0.3, ay = -0.2, bx = 0.1, by = 0.4;
        std::vector<double> vals = {0.0, 0.0, ax, ay, ax + bx, ay + by};
        auto path = lift_piecewise_linear(TimeGrid::uniform(0.0, 2.0, 2), vals, 2, 1.0);
        std::vector<double> zz(4);
        path.second_level(0, 2, zz.data());
        std::vector<double> hand = {0.5 * ax * ax + 0.5 * bx * bx + ax * bx,
                                    0.5 * ax * ay + 0.5 * bx * by + ax * by,
                                    0.5 * ay * ax + 0.5 * by * bx + ay * bx,
                                    0.5 * ay * ay + 0.5 * by * by + ay * by};
        CHECK(max_abs_diff(zz, hand) < 1e-15);

        auto oracle = pl_second_level_oracle({0.0, 1.0, 2.0},
                                             {{0.0, 0.0}, {ax, ay}, {ax + bx, ay + by}}, 1 << 10);
        CHECK(max_abs_diff(zz, oracle) < 1e-13);
    }

    SECTION("unit square loop closes with unit Levy area") {
        std::vector<double> vals = {0, 0, 1, 0, 1, 1, 0, 1, 0, 0};
        auto path = lift_piecewise_linear(TimeGrid::uniform(0.0, 4.0, 4), vals, 2, 1.0);
        std::vector<double> dz(2), la(4);
        path.increment(0, 4, dz.data());
        CHECK(dz[0] == 0.0);
        CHECK(dz[1] == 0.0);
        path.levy_area(0, 4, la.data());
        // shoelace area of the counterclockwise unit square
        double shoelace = 0.5 * ((1 * 1 - 1 * 0) + (1 * 1 - 0 * 1));
        REQUIRE(shoelace == 1.0);
        CHECK(std::abs(la[1] - 1.0) < 1e-14);
    }

    SECTION("residual budget holds on an irregular grid") {
        TimeGrid grid({0.0, 0.05, 0.3, 0.31, 0.9, 1.7, 2.0});
        std::vector<double> vals;
        for (double t : grid.t) {
            vals.push_back(std::sin(3.0 * t) + 0.5 * t);
            vals.push_back(std::cos(2.0 * t));
            vals.push_back(t * t - 1.0);
        }
        auto path = lift_piecewise_linear(grid, vals, 3, 0.5);
        double scale = 0.0;
        for (double v : vals) scale = std::max(scale, std::abs(v));
        CHECK(path.chen_residual() <= 1e-12 * (1.0 + scale * scale));
        CHECK(path.geometricity_residual() <= 1e-12 * (1.0 + scale * scale));
    }
}

TEST_CASE("dyadic piecewise-linear refinement converges to the smooth lift") {
    PathFn z = [](double t, double* out) {
        out[0] = std::sin(t);
        out[1] = std::cos(2.0 * t);
    };
    PathFn zdot = [](double t, double* out) {
        out[0] = std::cos(t);
        out[1] = -2.0 * std::sin(2.0 * t);
    };
    TimeGrid coarse = TimeGrid::uniform(0.0, 1.5, 4);
    auto ref = lift_smooth(z, zdot, 2, coarse, 1.0, 16);

    double prev = -1.0;
    for (std::size_t res : {16u, 64u, 256u, 1024u}) {
        TimeGrid fine = coarse.refined(res);
        std::vector<double> vals(fine.points() * 2);
        for (std::size_t i = 0; i < fine.points(); ++i) z(fine.t[i], vals.data() + i * 2);
        auto pl = coarsen_stride(lift_piecewise_linear(fine, vals, 2, 1.0), res);
        double err = 0.0;
        std::vector<double> a(4);
        for (std::size_t i = 0; i < coarse.intervals(); ++i) {
            pl.second_level(i, i + 1, a.data());
            const double* b = ref.block(i);
            for (std::size_t m = 0; m < 4; ++m) err = std::max(err, std::abs(a[m] - b[m]));
        }
        if (prev >= 0.0) CHECK(err < 0.5 * prev); // second-order, so 4x per level
        prev = err;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("coarsen agrees with direct construction") {
    SECTION("merged chords versus direct coarse lift") {
        TimeGrid fine = TimeGrid::uniform(0.0, 2.0, 64);
        std::vector<double> vals(fine.points() * 2);
        for (std::size_t i = 0; i < fine.points(); ++i) {
            vals[i * 2] = std::sin(fine.t[i]);
            vals[i * 2 + 1] = fine.t[i] * fine.t[i];
        }
        auto path = lift_piecewise_linear(fine, vals, 2, 1.0);
        auto merged = coarsen_stride(path, 8);
        CHECK(merged.intervals() == 8);
        CHECK(merged.chen_residual() < 1e-14);
        CHECK(merged.geometricity_residual() < 1e-14);
    }

    SECTION("coarsen after dyadic refine is binary-exact on dyadic data") {
        // Values on a 1/8 lattice: all chord arithmetic stays exact in
        // binary, so the round trip must reproduce the stored blocks bit for
        // bit.
        TimeGrid coarse = TimeGrid::uniform(0.0, 1.0, 4);
        std::vector<double> cvals = {0.0, 0.0, 0.5, -0.25, 0.125, 1.0, -0.75, 0.375, 0.25, 0.5};
        auto direct = lift_piecewise_linear(coarse, cvals, 2, 1.0);

        TimeGrid fine = coarse.refined(2);
        std::vector<double> fvals(fine.points() * 2);
        for (std::size_t i = 0; i < fine.points(); ++i) {
            if (i % 2 == 0) {
                fvals[i * 2] = cvals[i]; // same node
                fvals[i * 2 + 1] = cvals[i + 1];
            } else {
                fvals[i * 2] = 0.5 * (cvals[i - 1] + cvals[i + 1]);
                fvals[i * 2 + 1] = 0.5 * (cvals[i] + cvals[i + 2]);
            }
        }
        auto round_trip = coarsen_stride(lift_piecewise_linear(fine, fvals, 2, 1.0), 2);
        for (std::size_t i = 0; i < direct.raw_second_level().size(); ++i)
            CHECK(round_trip.raw_second_level()[i] == direct.raw_second_level()[i]);
    }
}

TEST_CASE("time reversal negates the Levy area") {
    TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 16);
    std::vector<double> vals(grid.points() * 2);
    for (std::size_t i = 0; i < grid.points(); ++i) {
        vals[i * 2] = std::sin(5.0 * grid.t[i]);
        vals[i * 2 + 1] = std::cos(3.0 * grid.t[i]) - 1.0;
    }
    auto path = lift_piecewise_linear(grid, vals, 2, 0.5);
    auto rev = path.reversed();

    CHECK(rev.alpha() == path.alpha());
    CHECK(rev.geometricity_residual() < 1e-15);
    std::vector<double> la(4), lar(4), dz(2), dzr(2);
    path.levy_area(0, 16, la.data());
    rev.levy_area(0, 16, lar.data());
    CHECK(std::abs(la[1] + lar[1]) < 1e-14);
    path.increment(0, 16, dz.data());
    rev.increment(0, 16, dzr.data());
    CHECK(std::abs(dz[0] + dzr[0]) < 1e-15);
    CHECK(std::abs(dz[1] + dzr[1]) < 1e-15);

    // reversing twice brings the original back
    auto twice = rev.reversed();
    CHECK(max_abs_diff(twice.raw_values(), path.raw_values()) < 1e-15);
    CHECK(max_abs_diff(twice.raw_second_level(), path.raw_second_level()) < 1e-15);
}

TEST_CASE("residuals expose corrupted second-level data") {
    TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 8);
    std::vector<double> vals(grid.points() * 2);
    for (std::size_t i = 0; i < grid.points(); ++i) {
        vals[i * 2] = 0.7 * grid.t[i] + 0.1 * std::sin(9.0 * grid.t[i]);
        vals[i * 2 + 1] = grid.t[i] * grid.t[i];
    }
    auto path = lift_piecewise_linear(grid, vals, 2, 0.5);

    SECTION("zeroed blocks break the Chen coherence") {
        auto broken = path.with_second_level(std::vector<double>(8 * 4, 0.0), false);
        CHECK(broken.chen_residual() > 1e-4);
    }

    SECTION("antisymmetrised blocks stay Chen-coherent but lose geometricity") {
        auto anti = antisymmetrize_second_level(path);
        CHECK(anti.chen_residual() < 1e-14);
        // the geometric defect equals the norm of (1/2) dZ (x) dZ
        double expect = 0.0;
        std::vector<double> dz(2);
        for (std::size_t i = 0; i < path.intervals(); ++i) {
            path.increment(i, i + 1, dz.data());
            for (std::size_t l = 0; l < 2; ++l)
                for (std::size_t k = 0; k < 2; ++k)
                    expect = std::max(expect, std::abs(0.5 * dz[l] * dz[k]));
        }
        CHECK(anti.geometricity_residual() == Catch::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("Holder and roughness reports behave on reference paths") {
    SECTION("linear path at alpha = 1 recovers the speed") {
        TimeGrid grid = TimeGrid::uniform(0.0, 2.0, 32);
        std::vector<double> vals(grid.points());
        for (std::size_t i = 0; i < grid.points(); ++i) vals[i] = 0.75 * grid.t[i];
        auto path = lift_piecewise_linear(grid, vals, 1, 1.0);
        CHECK(path.holder_estimate(1.0) == Catch::Approx(0.75).epsilon(1e-12));
        CHECK(path.holder_estimate_level2(1.0) ==
              Catch::Approx(0.5 * 0.75 * 0.75).epsilon(1e-10));
    }

    SECTION("roughness scores separate smooth from fractional paths") {
        auto min_interior = [](const std::vector<double>& s) {
            double m = 1e300;
            for (std::size_t i = 1; i + 1 < s.size(); ++i) m = std::min(m, s[i]);
            return m;
        };

        double smooth_floor_coarse = 0.0;
        double smooth_floor = 0.0;
        for (std::size_t n : {std::size_t{1} << 8, std::size_t{1} << 12}) {
            TimeGrid grid = TimeGrid::uniform(0.0, 1.0, n);
            std::vector<double> vals(grid.points());
            for (std::size_t i = 0; i < grid.points(); ++i) vals[i] = std::sin(grid.t[i]);
            auto smooth = lift_piecewise_linear(grid, vals, 1, 1.0);
            double floor = min_interior(smooth.true_roughness_scores(0.4));
            if (n == (std::size_t{1} << 8))
                smooth_floor_coarse = floor;
            else
                smooth_floor = floor;
        }
        // a Lipschitz path loses score like mesh^{0.2} under refinement
        CHECK(smooth_floor < 0.8 * smooth_floor_coarse);

        GaussianSpec spec;
        spec.hurst = 0.4;
        spec.seed = 11;
        spec.fine_resolution = 1;
        TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 1 << 12);
        auto rough = lift_gaussian(spec, grid);
        double rough_floor = min_interior(rough.true_roughness_scores(0.4));
        // the fractional increments live on the dt^{0.4} scale, so the score
        // grows like mesh^{-0.4} and sits far above the smooth floor
        CHECK(rough_floor > 10.0 * smooth_floor);
        WARN("roughness score floor, fBm H=0.4 at 2^12: " << rough_floor
             << " (smooth: " << smooth_floor << ")");
    }
}
