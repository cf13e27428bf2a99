#include "torsionlab/brownian.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/levels.hpp"
#include "torsionlab/special.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace torsionlab;

namespace {

Point pt(double x, double y) {
    Point p(2);
    p << x, y;
    return p;
}

template <typename F>
double simpson(F f, double a, double b, int m) {
    const double h = (b - a) / m;
    double s = f(a) + f(b);
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace

TEST_SUITE("level_analysis") {
    TEST_CASE("distribution function of a hand-built field") {
        ScalarField f;
        f.grid.origin = pt(0, 0);
        f.grid.h = 1.0;
        f.grid.extents = Eigen::Vector2i(2, 2);
        f.values = Eigen::Vector4d(0.0, 1.0, 2.0, 3.0);
        f.mask.assign(4, 1);
        const DistributionFunction mu = distribution_function(f, 4);
        CHECK(mu.total == doctest::Approx(4.0));
        CHECK(mu(0.0) == doctest::Approx(4.0));
        CHECK(mu(1.0) == doctest::Approx(2.0));
        CHECK(mu(2.0) == doctest::Approx(1.0));
        CHECK(mu(3.0) == doctest::Approx(0.0));
        CHECK(mu(0.5) == doctest::Approx(3.0));
        CHECK(mu.max_level() == doctest::Approx(3.0));
    }

    TEST_CASE("distribution function is non-increasing") {
        const DistributionFunction mu = distribution_function(grid_torsion(Domain::ellipse(0.6), 96), 128);
        for (std::size_t i = 1; i < mu.mu.size(); ++i) CHECK(mu.mu[i] <= mu.mu[i - 1]);
        CHECK(mu.mu.back() == 0.0);
    }

    TEST_CASE("ball distribution is the area of the super-level disk") {
        for (double t : {0.0, 0.05, 0.1, 0.2, 0.3}) {
            const double R2 = std::max(0.0, 1.0 - 4.0 * t);  // u_B = (1 − r²)/4 on the unit disk
            CHECK(ball_distribution(2, std::numbers::pi, t) == doctest::Approx(std::numbers::pi * R2));
        }
        // n = 3: u = (R² − r²)/6.
        const double v = 4.0 * std::numbers::pi / 3.0;
        CHECK(ball_distribution(3, v, 0.1) == doctest::Approx(v * std::pow(1.0 - 0.6, 1.5)));
    }

    TEST_CASE("t* on the ball distribution") {
        // μ_B(t) = v − 4πt, so μ_B(t*) = v(1 − θA) gives t* = vθA/(4π).
        const double v = 2.0;
        DistributionFunction mu;
        for (int k = 0; k <= 1000; ++k) {
            const double t = v / (4.0 * std::numbers::pi) * k / 1000.0;
            mu.t.push_back(t);
            mu.mu.push_back(ball_distribution(2, v, t));
        }
        mu.total = v;
        for (double A : {0.1, 0.5, 1.0})
            CHECK(t_star(mu, A, 0.25) == doctest::Approx(v * 0.25 * A / (4.0 * std::numbers::pi)).epsilon(1e-9));
        CHECK_THROWS_AS((void)t_star(mu, 0.0), ValidationError);
    }

    TEST_CASE("t0 meets its defining identity and lower bound") {
        for (int n : {2, 3})
            for (double A : {0.01, 0.2, 1.0, 1.9}) {
                const double t0 = t_zero(n, A);
                CHECK(ball_distribution(n, 1.0, 2.0 * t0) == doctest::Approx(1.0 - A / 8.0).epsilon(1e-12));
                CHECK(t0 >= t_zero_lower_bound(n, A));
            }
    }

    TEST_CASE("layer-cake norms of the ball") {
        for (int n : {2, 3})
            for (double p : {1.0, 2.0, 3.5}) {
                const double v = 1.7;
                const double R = std::pow(v / unit_ball_volume(n), 1.0 / n);
                const double direct = simpson([&](double r) { return std::pow((R * R - r * r) / (2.0 * n), p) * unit_sphere_area(n) * std::pow(r, n - 1); }, 0.0, R, 20000);
                CHECK(ball_lp_norm(n, v, p) == doctest::Approx(direct).epsilon(1e-8));
                DistributionFunction mu;
                const double top = ball_sup(n, v);
                for (int k = 0; k <= 4000; ++k) {
                    mu.t.push_back(top * k / 4000.0);
                    mu.mu.push_back(ball_distribution(n, v, mu.t.back()));
                }
                mu.total = v;
                CHECK(lp_norm(mu, p) == doctest::Approx(direct).epsilon(1e-4));
            }
    }

    TEST_CASE("grid norms against the ball") {
        const ScalarField u = grid_torsion(Domain::disk(1.0), 128);
        CHECK(field_lp_norm(u, 1.0) == doctest::Approx(ball_lp_norm(2, std::numbers::pi, 1.0)).epsilon(1e-3));
        CHECK(field_lp_norm(u, 2.0) == doctest::Approx(ball_lp_norm(2, std::numbers::pi, 2.0)).epsilon(1e-3));
        CHECK(field_lp_norm(u, std::numeric_limits<double>::infinity()) == doctest::Approx(0.25).epsilon(2e-3));
        const DistributionFunction mu = distribution_function(u, 256);
        CHECK(lp_norm(mu, 1.0) == doctest::Approx(field_lp_norm(u, 1.0)).epsilon(1e-2));
    }

    TEST_CASE("rearrangement is equimeasurable and radial") {
        const ScalarField u = grid_torsion(Domain::ellipse(0.6), 96);
        const ScalarField s = rearranged_field(u);
        CHECK(s.masked_count() == u.masked_count());
        CHECK(field_lp_norm(s, 1.0) == doctest::Approx(field_lp_norm(u, 1.0)).epsilon(1e-12));
        CHECK(field_lp_norm(s, 3.0) == doctest::Approx(field_lp_norm(u, 3.0)).epsilon(1e-12));
        CHECK(s.max_value() == u.max_value());
        const RadialProfile prof = rearrangement(u);
        for (std::size_t k = 1; k < prof.value.size(); ++k) CHECK(prof.value[k] <= prof.value[k - 1]);
        CHECK(prof(0.0) == u.max_value());
        // Pólya–Szegő: rearrangement does not increase the Dirichlet energy.
        CHECK(dirichlet_energy(s) <= dirichlet_energy(u) * 1.01);
    }

    TEST_CASE("rearranging a radial field changes little") {
        const ScalarField u = grid_torsion(Domain::disk(1.0), 96);
        const ScalarField s = rearranged_field(u);
        CHECK(s.value_at(pt(0.5, 0.0)) == doctest::Approx(u.value_at(pt(0.5, 0.0))).epsilon(2e-2));
    }

    TEST_CASE("energy derivative identity") {
        CHECK(energy_derivative_check(grid_torsion(Domain::disk(1.0), 128), 32) <= 0.05);
        const Domain sq = Domain::unit_square();
        const ScalarField flat = sample_field(sq, grid_for(sq, 32), [](const Point&) { return 1.0; });
        CHECK_THROWS_AS((void)energy_derivative_check(flat, 32), ValidationError);
    }

    TEST_CASE("super-level domains") {
        const ScalarField u = grid_torsion(Domain::disk(1.0), 64);
        const DistributionFunction mu = distribution_function(u, 64);
        const Domain level = superlevel_domain(u, 0.1);
        CHECK(volume(level).value == doctest::Approx(mu(0.1)).epsilon(1e-2));
        CHECK(contains(level, pt(0, 0)));
        CHECK_FALSE(contains(level, pt(0.9, 0)));
        CHECK_THROWS_AS((void)superlevel_domain(u, 1.0), ValidationError);
    }

    TEST_CASE("distribution CSV") {
        DistributionFunction mu;
        mu.t = {0.0, 0.5};
        mu.mu = {2.0, 0.0};
        mu.total = 2.0;
        std::ostringstream out;
        write_distribution_csv(out, mu);
        CHECK(out.str() == "t,mu\n0,2\n0.5,0\n");
    }
}
