#pragma once

#include <cmath>
#include <numbers>

namespace torsionlab {

/// Volume of the unit ball in R^n, ω_n = π^{n/2} / Γ(n/2 + 1).
template <typename Scalar = double>
Scalar unit_ball_volume(int n) {
    using std::exp;
    using std::lgamma;
    using std::log;
    const Scalar half_n = Scalar(n) / Scalar(2);
    return exp(half_n * log(std::numbers::pi_v<Scalar>) - lgamma(half_n + Scalar(1)));
}

/// Surface area of the unit sphere S^{n-1}, n ω_n.
template <typename Scalar = double>
Scalar unit_sphere_area(int n) {
    return Scalar(n) * unit_ball_volume<Scalar>(n);
}

double log_beta(double a, double b);
double beta_function(double a, double b);

/// Regularized incomplete beta I_x(a, b) (continued fraction, modified Lentz).
double regularized_beta(double x, double a, double b);

/// ∫_{S^{n-1}} |θ_1|^p dσ(θ), closed form for p > -1.
double sphere_abs_moment(int n, double p);

}  // namespace torsionlab
