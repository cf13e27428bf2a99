#include "torsionlab/asymmetry.hpp"
#include "torsionlab/errors.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <numbers>

using namespace torsionlab;

namespace {

Point pt(double x, double y) {
    Point p(2);
    p << x, y;
    return p;
}

// |E Δ B| / |E| for the ellipse (1, 1 + eps) and the concentric disk of equal
// area, by integrating |r_E(θ)² − R²| / 2 over the angle.
double ellipse_origin_symdiff(double eps) {
    const double b = 1.0 + eps, R2 = b;
    const int m = 200000;
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
        const double t = 2.0 * std::numbers::pi * (k + 0.5) / m;
        const double c = std::cos(t), si = std::sin(t);
        const double r2 = 1.0 / (c * c + si * si / (b * b));
        s += 0.5 * std::abs(r2 - R2);
    }
    return s * 2.0 * std::numbers::pi / m / (std::numbers::pi * b);
}

// Unit square against the concentric equal-area disk: the disk pokes out
// through each side by a circular segment.
double square_asymmetry() {
    const double R = 1.0 / std::sqrt(std::numbers::pi), d = 0.5;
    const double segment = R * R * std::acos(d / R) - d * std::sqrt(R * R - d * d);
    return 2.0 * 4.0 * segment;
}

}  // namespace

TEST_SUITE("asymmetry") {
    TEST_CASE("trivial cases") {
        CHECK(fraenkel(Domain::disk(1.3)).A == 0.0);
        CHECK(symdiff_fraction(Domain::disk(1.0), pt(0, 0)) == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(symdiff_fraction(Domain::disk(1.0), pt(2.5, 0)) == doctest::Approx(2.0));
    }

    TEST_CASE("ellipse symmetric difference against a dense cell count") {
        const double eps = 0.2, b = 1.2, R = std::sqrt(b), h = 1e-3;
        long both = 0, either = 0;
        for (double x = -R + h / 2; x < R; x += h)
            for (double y = -b + h / 2; y < b; y += h) {
                const bool in_e = x * x + y * y / (b * b) < 1.0, in_b = x * x + y * y < R * R;
                if (in_e != in_b) ++either;
                if (in_e && in_b) ++both;
            }
        const double brute = either * h * h / (std::numbers::pi * b);
        CHECK(symdiff_fraction(Domain::ellipse(eps), pt(0, 0)) == doctest::Approx(brute).epsilon(1e-3));
        CHECK(symdiff_fraction(Domain::ellipse(eps), pt(0, 0)) == doctest::Approx(ellipse_origin_symdiff(eps)).epsilon(1e-6));
    }

    TEST_CASE("ellipse asymmetry sits at the centre") {
        for (double eps : {0.1, 0.5}) {
            const AsymmetryResult r = fraenkel(Domain::ellipse(eps));
            CHECK(r.A == doctest::Approx(ellipse_origin_symdiff(eps)).epsilon(1e-6));
            CHECK(r.center.norm() < 1e-6);
        }
    }

    TEST_CASE("square asymmetry is exact") {
        CHECK(fraenkel(Domain::unit_square()).A == doctest::Approx(square_asymmetry()).epsilon(1e-9));
        const Domain tri = Domain::polygon({{0, 0}, {1, 0}, {0, 1}});
        const AsymmetryResult r = fraenkel(tri);
        const AsymmetryResult scan = asymmetry_scan(tri, 0.01);
        CHECK(r.A <= scan.A + 1e-6);
    }

    TEST_CASE("two separated disks against an exhaustive scan") {
        auto inside = [](const Point& x) { return (x - pt(-2, 0)).squaredNorm() < 1.0 || (x - pt(2, 0)).squaredNorm() < 1.0; };
        const Domain two = Domain::implicit(2, inside, pt(-3, -1), pt(3, 1), 2.0 * std::numbers::pi, "two disks");
        AsymmetryConfig cfg;
        cfg.implicit_rows = 128;
        cfg.implicit_samples = 128;
        const AsymmetryResult r = fraenkel(two, cfg);
        const AsymmetryResult scan = asymmetry_scan(two, 0.05, cfg);
        CHECK(r.A <= scan.A + 1e-3);
        CHECK(r.A == doctest::Approx(1.0).epsilon(2e-3));
    }

    TEST_CASE("scale and translation invariance") {
        const Domain s = Domain::stadium(pt(0, 0), pt(1.5, 0.5), 0.4);
        const double A = fraenkel(s).A;
        for (double r : {0.5, 2.0}) CHECK(fraenkel(scale(s, r)).A == doctest::Approx(A).epsilon(1e-2));
        CHECK(std::abs(fraenkel(translate(s, pt(3.0, -7.0))).A - A) <= 1e-3);
    }

    TEST_CASE("symmetric difference is Lipschitz in the centre") {
        const Domain e = Domain::ellipse(0.4);
        const double R = std::sqrt(1.4), step = 0.05;
        for (int k = 0; k < 6; ++k) {
            const Point c = pt(-0.3 + 0.1 * k, 0.2 - 0.05 * k);
            const double a = symdiff_fraction(e, c), b = symdiff_fraction(e, c + pt(step, 0));
            // |B_c Δ B_c'| ≤ 4R|c − c'| in the plane.
            CHECK(std::abs(a - b) <= 4.0 * R * step / (std::numbers::pi * 1.4) + 1e-9);
        }
    }

    TEST_CASE("three-dimensional boxes by voxel counting") {
        Point lo = Point::Zero(3), hi = Point::Ones(3);
        AsymmetryConfig cfg;
        cfg.lattice_divisions = 8;
        cfg.refine_starts = 1;
        cfg.voxel_resolution = 48;
        const AsymmetryResult r = fraenkel(Domain::rectangle(lo, hi), cfg);
        // Midpoint rule for |cube \ B| with B the unit-volume ball at the cube centre.
        const double R = std::cbrt(3.0 / (4.0 * std::numbers::pi));
        const int m = 160;
        long outside = 0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) {
                    const double x = (i + 0.5) / m - 0.5, y = (j + 0.5) / m - 0.5, z = (k + 0.5) / m - 0.5;
                    if (x * x + y * y + z * z >= R * R) ++outside;
                }
        const double expected = 2.0 * outside / double(m) / m / m;
        CHECK(r.A == doctest::Approx(expected).epsilon(2e-2));
        CHECK((r.center - Point::Constant(3, 0.5)).norm() < 0.05);
    }

    TEST_CASE("transfer bound") {
        CHECK(transfer_lower_bound(0.4, 0.25) == doctest::Approx(0.2));
        CHECK(transfer_lower_bound(0.4, 1e-12) == doctest::Approx(0.4));
        CHECK_THROWS_AS((void)transfer_lower_bound(0.4, 0.5), ValidationError);
        CHECK_THROWS_AS((void)transfer_lower_bound(0.4, 0.0), ValidationError);
    }

    TEST_CASE("result JSON carries the trace") {
        const auto j = nlohmann::json::parse(fraenkel(Domain::ellipse(0.3)).to_json());
        CHECK(j.contains("A"));
        CHECK(j["trace"].size() >= 2);
        CHECK(j["evaluations"].get<int>() > 0);
    }
}
