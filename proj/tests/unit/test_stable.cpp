#include "torsionlab/errors.hpp"
#include "torsionlab/levels.hpp"
#include "torsionlab/random.hpp"
#include "torsionlab/stable.hpp"

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

FractionalConfig config(double alpha) {
    FractionalConfig cfg;
    cfg.alpha = alpha;
    cfg.ball_amplitude = oracle::stable_ball_amplitude(2, alpha);
    return cfg;
}

}  // namespace

TEST_SUITE("stable_torsion") {
    TEST_CASE("fractional Laplacian constant") {
        for (int n : {1, 2, 3})
            for (double a : {0.5, 1.0, 1.5}) {
                const double expect = a * std::pow(2.0, a - 1.0) * std::tgamma((n + a) / 2.0) /
                                      (std::pow(std::numbers::pi, n / 2.0) * std::tgamma(1.0 - a / 2.0));
                CHECK(fractional_laplacian_constant(n, a) == doctest::Approx(expect).epsilon(1e-12));
            }
        CHECK(fractional_laplacian_constant(2, 1.0) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)));
        CHECK_THROWS_AS((void)fractional_laplacian_constant(2, 2.5), ValidationError);
    }

    TEST_CASE("overshoot table inverts its distribution") {
        for (double a : {0.5, 1.0, 1.7}) {
            const OvershootTable t(a, 4096);
            for (double u : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999})
                CHECK(t.cdf(t.sample(u)) == doctest::Approx(u).epsilon(1e-6));
            CHECK(t.sample(0.2) >= 1.0);
        }
    }

    TEST_CASE("overshoot moment against the Beta law of 1/rho^2") {
        // 1/ρ² ~ Beta(α/2, 1 − α/2), whose mean is α/2.
        const OvershootTable t(1.2, 4096);
        const int m = 200000;
        double sum = 0.0;
        for (int k = 0; k < m; ++k) {
            const double rho = t.sample((k + 0.5) / m);
            sum += 1.0 / (rho * rho);
        }
        CHECK(sum / m == doctest::Approx(0.6).epsilon(1e-3));
    }

    TEST_CASE("overshoot table JSON round trip") {
        const OvershootTable t(0.8, 64);
        const OvershootTable back = OvershootTable::from_json(t.to_json());
        CHECK(back.nodes() == 64);
        CHECK(back.sample(0.37) == t.sample(0.37));
        CHECK_THROWS_AS(OvershootTable::from_json("{\"alpha\": 1}"), ParseError);
    }

    TEST_CASE("positive stable variates have the right Laplace transform") {
        for (double beta : {0.5, 0.8}) {
            RandomStream rng(7, 0);
            const int m = 200000;
            double s = 0.0, s2 = 0.0;
            for (int k = 0; k < m; ++k) {
                const double v = std::exp(-positive_stable_variate(beta, std::numbers::pi * rng.uniform_open(), rng.exponential()));
                s += v;
                s2 += v * v;
            }
            const double mean = s / m, se = std::sqrt((s2 / m - mean * mean) / m);
            CHECK(std::abs(mean - std::exp(-1.0)) <= 4.0 * se);
        }
    }

    TEST_CASE("ball lifetime and rigidity closed forms") {
        const FractionalConfig cfg = config(1.0);
        CHECK(stable_ball_lifetime(cfg, 1.0, pt(0, 0), 2) == doctest::Approx(cfg.ball_amplitude));
        const double T = stable_ball_rigidity(cfg, 2, std::numbers::pi);
        // ∫ C (1 − r²)^{1/2} 2πr dr = 2πC/3.
        CHECK(T == doctest::Approx(2.0 * std::numbers::pi * cfg.ball_amplitude / 3.0));
        FractionalConfig none;
        CHECK_THROWS_AS((void)stable_ball_lifetime(none, 1.0, pt(0, 0), 2), ValidationError);
    }

    TEST_CASE("stable walk-on-spheres on the disk") {
        for (double a : {0.6, 1.0, 1.6}) {
            FractionalConfig cfg = config(a);
            cfg.paths = 20000;
            const Point x = pt(0.3, -0.4);
            const Estimate e = stable_wos_lifetime(Domain::disk(1.0), x, cfg);
            CHECK(std::abs(e.value - stable_ball_lifetime(cfg, 1.0, x, 2)) <= 3.0 * e.std_error);
        }
    }

    TEST_CASE("alpha = 2 reduces to the Brownian walk") {
        FractionalConfig cfg;
        cfg.alpha = 2.0;
        cfg.ball_amplitude = 0.25;
        cfg.paths = 10000;
        const Estimate e = stable_wos_lifetime(Domain::disk(1.0), pt(0.5, 0), cfg);
        CHECK(std::abs(e.value - 0.1875) <= 3.0 * e.std_error + 1e-3);
    }

    TEST_CASE("path simulation reproduces the ball amplitude") {
        StablePathConfig cfg;
        cfg.paths = 6000;
        const Estimate c = calibrate_ball_amplitude(2, 1.0, cfg);
        CHECK(std::abs(c.value - oracle::stable_ball_amplitude(2, 1.0)) <= 3.0 * c.std_error + 2e-3);
        const Estimate e = stable_path_lifetime(Domain::ellipse(0.5), pt(0, 0), 1.0, cfg);
        CHECK(e.value > 0.0);
    }

    TEST_CASE("fractional rigidity of the disk") {
        FractionalConfig cfg = config(1.0);
        const Estimate T = fractional_rigidity(Domain::disk(1.0), cfg, {48, 2});
        CHECK(std::abs(T.value - stable_ball_rigidity(cfg, 2, std::numbers::pi)) <= 3.0 * T.std_error + 1e-2);
    }

    TEST_CASE("seminorm identity for the ball lifetime") {
        const FractionalConfig cfg = config(1.0);
        const Domain disk = Domain::disk(1.0);
        const ScalarField u = sample_field(disk, grid_for(disk, 64), [&](const Point& x) { return stable_ball_lifetime(cfg, 1.0, x, 2); });
        const SeminormResult s = fractional_seminorm(u, 1.0, 2.0);
        const double lhs = 0.5 * fractional_laplacian_constant(2, 1.0) * s.value * s.value;
        CHECK(lhs == doctest::Approx(stable_ball_rigidity(cfg, 2, std::numbers::pi)).epsilon(0.03));
        CHECK(s.integral == doctest::Approx(s.interior + s.exterior + s.tail + s.shell));
        CHECK(s.exponent == doctest::Approx(1.0));
    }

    TEST_CASE("variational energy bound") {
        const FractionalConfig cfg = config(1.0);
        const Domain disk = Domain::disk(1.0);
        const ScalarField u = sample_field(disk, grid_for(disk, 64), [&](const Point& x) { return stable_ball_lifetime(cfg, 1.0, x, 2); });
        const double T = stable_ball_rigidity(cfg, 2, std::numbers::pi);
        const double full = fractional_energy_bound(u, 1.0);
        const double half = fractional_energy_bound(scaled(u, 0.5), 1.0);
        const double part = fractional_energy_bound(scaled(u, 0.6), 1.0);
        CHECK(full == doctest::Approx(T).epsilon(0.03));
        CHECK(part < full);
        // E(cu) = 2cI - c^2 S; recover I and S from c = 1 and c = 1/2.
        const double S = 2.0 * (2.0 * half - full);
        const double I = 0.5 * (full + S);
        CHECK(I == doctest::Approx(S).epsilon(0.03));
        CHECK(part == doctest::Approx(1.2 * I - 0.36 * S).epsilon(1e-9));
    }

    TEST_CASE("fractional perimeter: isoperimetry and scaling") {
        const double r = 1.0 / std::sqrt(std::numbers::pi);
        const double ball = fractional_perimeter(Domain::disk(r), 1.0, 64);
        const double square = fractional_perimeter(Domain::rectangle(pt(-0.5, -0.5), pt(0.5, 0.5)), 1.0, 64);
        CHECK(ball < square);
        const double big = fractional_perimeter(Domain::disk(2.0 * r), 1.0, 64);
        // Kernel order α/2 gives P(rD) = r^{n - α/2} P(D).
        CHECK(big / ball == doctest::Approx(std::pow(2.0, 1.5)).epsilon(0.03));
    }

    TEST_CASE("coarea formula on the torsion function") {
        const Domain e = Domain::ellipse(0.5);
        const CoareaResult c = fractional_coarea(grid_torsion(e, 64), 1.0, 48);
        CHECK(c.layered == doctest::Approx(c.seminorm).epsilon(0.1));
        CHECK(c.levels.size() == c.perimeters.size());
    }

    TEST_CASE("orders outside the range are rejected") {
        FractionalConfig cfg = config(1.0);
        cfg.alpha = 2.5;
        CHECK_THROWS_AS((void)stable_wos_lifetime(Domain::disk(1.0), pt(0, 0), cfg), ValidationError);
        CHECK_THROWS_AS((void)fractional_seminorm(grid_torsion(Domain::disk(1.0), 32), 2.0, 1.0), ValidationError);
    }
}
