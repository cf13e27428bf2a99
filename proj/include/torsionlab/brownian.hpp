#pragma once

#include "torsionlab/field.hpp"
#include "torsionlab/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace torsionlab {

/// Expected exit time of Brownian motion (generator Δ) from the ball of
/// radius R about the origin, as a function of |x|: (R² − |x|²)/(2n).
template <typename Scalar>
Scalar ball_lifetime_radial(Scalar R, Scalar radius, int n) {
    return (R * R - radius * radius) / (Scalar(2) * Scalar(n));
}

[[nodiscard]] double ball_lifetime(double R, const Point& x, int n);

/// E^0[τ_B²] style second moment for the centred ball, from −Δv = 2u:
/// v(x) = R²(R² − |x|²)/(2n²) − (R⁴ − |x|⁴)/(4n(n+2)).
[[nodiscard]] double ball_second_moment(double R, const Point& x, int n);

/// Torsion function of the ellipse with semi-axes (a, b):
/// a²b²/(2(a² + b²)) · (1 − x²/a² − y²/b²), zero outside.
template <typename Scalar>
Scalar ellipse_torsion(Scalar a, Scalar b, Scalar x, Scalar y) {
    const Scalar level = Scalar(1) - (x * x) / (a * a) - (y * y) / (b * b);
    if (level <= Scalar(0)) return Scalar(0);
    return (a * a * b * b) / (Scalar(2) * (a * a + b * b)) * level;
}

/// Torsion function of the ellipse with semi-axes (1, 1 + eps); zero outside.
[[nodiscard]] double ellipse_lifetime(double eps, const Eigen::Vector2d& x);

/// Closed-form torsion for balls and ellipses, nullopt for other kinds.
[[nodiscard]] std::optional<double> closed_form_lifetime(const Domain& domain, const Point& x);

/// Monte Carlo estimate with its standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    std::vector<std::string> warnings;
};

struct WosConfig {
    std::size_t paths = 100000;
    double boundary_eps = 0.0;  ///< 0 selects 1e-4 · (bounding-box diameter)
    int max_steps = 100000;
    std::uint64_t seed = 1;
    bool antithetic = false;
};

/// Walk-on-spheres estimate of E^x[τ_D]: each walk accumulates r_k²/(2n) over
/// the inscribed balls it visits and stops within boundary_eps of ∂D.
[[nodiscard]] Estimate wos_lifetime(const Domain& domain, const Point& x, const WosConfig& cfg = {});

enum class BoundaryTreatment {
    staircase,    ///< exterior neighbour value 0 at its cell centre
    linear_ghost  ///< zero placed at the boundary crossing along the axis
};

struct GridSolveConfig {
    int resolution = 256;
    BoundaryTreatment boundary = BoundaryTreatment::linear_ghost;
    double tolerance = 1e-10;  ///< relative residual ‖r‖/‖b‖
    int max_iterations = 0;    ///< 0 selects 20 · (cells along the longest axis) + 2000
};

/// Solves −Δv = rhs in the cells inside `domain`, v = 0 elsewhere, by
/// conjugate gradients on the (2n+1)-point Laplacian.
[[nodiscard]] ScalarField solve_dirichlet_poisson(const Domain& domain, const GridSpec& grid,
                                                  const Eigen::VectorXd& rhs, const GridSolveConfig& cfg);

/// Torsion function on a grid: −Δu = 1 in D, u = 0 outside.
[[nodiscard]] ScalarField grid_torsion(const Domain& domain, const GridSolveConfig& cfg);
[[nodiscard]] ScalarField grid_torsion(const Domain& domain, int resolution);

struct PathConfig {
    double dt = 1e-4;
    std::size_t paths = 20000;
    double t_max = 0.0;  ///< 0 selects 2 · (bounding-box diameter)²
    std::uint64_t seed = 1;
    bool bridge_correction = true;
};

/// Euler–Maruyama estimate of E^x[τ_D^p] with increments N(0, 2Δt) per coordinate.
[[nodiscard]] Estimate exit_moment_mc(const Domain& domain, const Point& x, double p, const PathConfig& cfg = {});

/// Fraction of simulated paths with τ_D > t.
[[nodiscard]] Estimate survival_mc(const Domain& domain, const Point& x, double t, const PathConfig& cfg = {});

/// T(D) = ‖u‖₁ = h^n Σ u.
[[nodiscard]] double torsional_rigidity(const ScalarField& field);

/// 2‖v‖₁ − ‖∇v‖₂² with forward differences; never exceeds T(D) for the
/// discrete problem.
[[nodiscard]] double variational_bound(const ScalarField& field, const ScalarField& test);

/// Discrete Dirichlet energy ‖∇v‖₂² (forward differences, zero beyond the grid).
[[nodiscard]] double dirichlet_energy(const ScalarField& field);

}  // namespace torsionlab
