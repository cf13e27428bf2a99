#include "torsionlab/brownian.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/parallel.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace torsionlab;

namespace {

Point pt(double x, double y) {
    Point p(2);
    p << x, y;
    return p;
}

// Torsional rigidity of the unit square from the double sine series of u.
double square_rigidity() {
    double s = 0.0;
    for (int j = 1; j < 400; j += 2)
        for (int k = 1; k < 400; k += 2) {
            const double jk = j * k, q = j * j + k * k;
            s += 1.0 / (jk * jk * q);
        }
    return 64.0 / std::pow(std::numbers::pi, 6) * s;
}

}  // namespace

TEST_SUITE("brownian_torsion") {
    TEST_CASE("ball lifetime formula") {
        CHECK(ball_lifetime(1.0, pt(0, 0), 2) == doctest::Approx(0.25));
        CHECK(ball_lifetime(2.0, pt(1, 1), 2) == doctest::Approx((4.0 - 2.0) / 4.0));
        Point x3 = Point::Zero(3);
        CHECK(ball_lifetime(1.0, x3, 3) == doctest::Approx(1.0 / 6.0));
        CHECK(ball_lifetime_radial(1.0, 1.0, 2) == 0.0);
    }

    TEST_CASE("second moment solves Δv = −2u in radial form") {
        for (int n : {2, 3}) {
            auto v = [&](double r) {
                Point x = Point::Zero(n);
                x[0] = r;
                return ball_second_moment(1.0, x, n);
            };
            for (double r : {0.2, 0.5, 0.8}) {
                const double h = 1e-4;
                const double d2 = (v(r + h) - 2 * v(r) + v(r - h)) / (h * h);
                const double d1 = (v(r + h) - v(r - h)) / (2 * h);
                const double lap = d2 + (n - 1) / r * d1;
                CHECK(lap == doctest::Approx(-2.0 * (1.0 - r * r) / (2.0 * n)).epsilon(1e-5));
            }
            CHECK(v(1.0) == doctest::Approx(0.0).epsilon(1e-14));
        }
        CHECK(ball_second_moment(1.0, pt(0, 0), 2) == doctest::Approx(0.09375));
    }

    TEST_CASE("ellipse torsion solves −Δu = 1") {
        const double h = 1e-4;
        for (const Point& x : {pt(0, 0), pt(0.3, 0.5), pt(-0.6, 0.2)}) {
            auto u = [](double a, double b) { return ellipse_torsion(1.0, 1.4, a, b); };
            const double lap = (u(x[0] + h, x[1]) + u(x[0] - h, x[1]) + u(x[0], x[1] + h) + u(x[0], x[1] - h) -
                                4 * u(x[0], x[1])) / (h * h);
            CHECK(lap == doctest::Approx(-1.0).epsilon(1e-5));
        }
        CHECK(ellipse_lifetime(1.0, Eigen::Vector2d(0, 0)) == doctest::Approx(0.4));
        CHECK(ellipse_torsion(1.0, 1.4, 1.0, 0.0) == 0.0);
        CHECK(closed_form_lifetime(Domain::ellipse(0.4), pt(0.3, 0.5)).value() ==
              doctest::Approx(ellipse_torsion(1.0, 1.4, 0.3, 0.5)));
        CHECK_FALSE(closed_form_lifetime(Domain::unit_square(), pt(0.5, 0.5)).has_value());
    }

    TEST_CASE("walk-on-spheres agrees with the ball formula off centre") {
        WosConfig cfg;
        cfg.paths = 20000;
        for (bool anti : {false, true}) {
            cfg.antithetic = anti;
            const Estimate e = wos_lifetime(Domain::disk(1.0), pt(0.6, -0.2), cfg);
            CHECK(std::abs(e.value - 0.15) <= 3.0 * e.std_error + 1e-3);
            CHECK(e.std_error > 0.0);
        }
    }

    TEST_CASE("walk-on-spheres is reproducible across thread counts") {
        WosConfig cfg;
        cfg.paths = 5000;
        cfg.seed = 42;
        const Domain d = Domain::ellipse(0.5);
        const int saved = thread_count();
        set_thread_count(1);
        const Estimate a = wos_lifetime(d, pt(0.2, 0.3), cfg);
        set_thread_count(4);
        const Estimate b = wos_lifetime(d, pt(0.2, 0.3), cfg);
        set_thread_count(saved);
        CHECK(a.value == b.value);
        CHECK(a.std_error == b.std_error);
        cfg.seed = 43;
        CHECK(wos_lifetime(d, pt(0.2, 0.3), cfg).value != a.value);
    }

    TEST_CASE("grid torsion of the unit square against the series") {
        const ScalarField f = grid_torsion(Domain::unit_square(), 128);
        CHECK(torsional_rigidity(f) == doctest::Approx(square_rigidity()).epsilon(2e-3));
        CHECK(f.value_at(pt(0.5, 0.5)) == doctest::Approx(0.0736713).epsilon(2e-3));
    }

    TEST_CASE("ghost boundary beats the staircase on the disk") {
        GridSolveConfig cfg;
        cfg.resolution = 64;
        cfg.boundary = BoundaryTreatment::staircase;
        const double stair = std::abs(grid_torsion(Domain::disk(1.0), cfg).value_at(pt(0, 0)) - 0.25);
        cfg.boundary = BoundaryTreatment::linear_ghost;
        const double ghost = std::abs(grid_torsion(Domain::disk(1.0), cfg).value_at(pt(0, 0)) - 0.25);
        CHECK(ghost < stair);
        CHECK(ghost < 1e-3);
    }

    TEST_CASE("grid solver rejects tiny resolutions") {
        CHECK_THROWS_AS((void)grid_torsion(Domain::disk(1.0), 8), ValidationError);
    }

    TEST_CASE("energy identity and the variational bound") {
        const Domain d = Domain::ellipse(0.4);
        const ScalarField u = grid_torsion(d, 128);
        const double T = torsional_rigidity(u);
        CHECK(dirichlet_energy(u) == doctest::Approx(T).epsilon(1e-2));
        CHECK(variational_bound(u, u) == doctest::Approx(T).epsilon(1e-2));
        CHECK(variational_bound(u, scaled(u, 0.7)) < T);
        CHECK(variational_bound(u, scaled(u, 0.7)) == doctest::Approx((2 * 0.7 - 0.49) * T).epsilon(1e-2));
    }

    TEST_CASE("exit moments by path simulation") {
        PathConfig cfg;
        cfg.paths = 4000;
        cfg.dt = 2e-4;
        const Estimate m1 = exit_moment_mc(Domain::disk(1.0), pt(0.3, 0), 1.0, cfg);
        CHECK(std::abs(m1.value - ball_lifetime(1.0, pt(0.3, 0), 2)) <= 3.0 * m1.std_error + 2e-3);
        const Estimate m2 = exit_moment_mc(Domain::disk(1.0), pt(0, 0), 2.0, cfg);
        CHECK(std::abs(m2.value - 0.09375) <= 3.0 * m2.std_error + 2e-3);
        CHECK(exit_moment_mc(Domain::disk(1.0), pt(1, 0), 1.0, cfg).value == 0.0);
    }

    TEST_CASE("survival probability against the Bessel series") {
        PathConfig cfg;
        cfg.paths = 4000;
        for (double t : {0.05, 0.15}) {
            const Estimate s = survival_mc(Domain::disk(1.0), pt(0, 0), t, cfg);
            CHECK(std::abs(s.value - oracle::disk_survival_at_center(1.0, t)) <= 3.0 * s.std_error + 5e-3);
        }
        CHECK(survival_mc(Domain::disk(1.0), pt(0, 0), 0.0, cfg).value == 1.0);
        CHECK(oracle::disk_survival_at_center(1.0, 1e-3) == doctest::Approx(1.0).epsilon(1e-6));
    }
}
