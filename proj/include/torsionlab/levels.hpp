#pragma once

#include "torsionlab/field.hpp"
#include "torsionlab/geometry.hpp"

#include <iosfwd>
#include <vector>

namespace torsionlab {

/// μ(t) = |{u > t}| tabulated at increasing breakpoints, linear in between
/// and zero from the last breakpoint on.
struct DistributionFunction {
    std::vector<double> t;
    std::vector<double> mu;
    double total = 0.0;  ///< |D|, equal to mu.front()

    [[nodiscard]] double operator()(double level) const;
    [[nodiscard]] double max_level() const { return t.back(); }
};

/// μ at `slices` uniformly spaced levels from 0 to max u, counting cells
/// with value strictly above each level; μ(0) is the masked volume.
[[nodiscard]] DistributionFunction distribution_function(const ScalarField& field, int slices);

/// μ_B(t) for the ball of volume v: v (1 − 2nω_n^{2/n} v^{−2/n} t)_+^{n/2}.
[[nodiscard]] double ball_distribution(int n, double v, double t);

/// sup{t > 0 : μ(t) > |D|(1 − θA)} on the interpolated table.
[[nodiscard]] double t_star(const DistributionFunction& mu, double A, double theta = 0.25);

/// (1/(4nω_n^{2/n}))(1 − (1 − A/8)^{2/n}), the level with μ_B(2t₀) = 1 − A/8.
[[nodiscard]] double t_zero(int n, double A);

/// Lower bound A/(16n²ω_n^{2/n}) on t_zero.
[[nodiscard]] double t_zero_lower_bound(int n, double A);

/// ‖u‖_p^p = ∫ p t^{p−1} μ(t) dt by the trapezoid rule on the table; for
/// p = ∞ the largest breakpoint.
[[nodiscard]] double lp_norm(const DistributionFunction& mu, double p);

/// h^n Σ u^p over the cells, or max u for p = ∞.
[[nodiscard]] double field_lp_norm(const ScalarField& field, double p);

/// ‖u_B‖_p^p for the ball of volume v:
/// (n/2) B(p+1, n/2) / ((2n)^p ω_n^{2p/n}) at |B| = 1, scaled by v^{(2p+n)/n}.
[[nodiscard]] double ball_lp_norm(int n, double v, double p);

/// u_B(0) = R²/(2n) for the ball of volume v.
[[nodiscard]] double ball_sup(int n, double v);

/// Non-increasing radial profile: value[k] holds on radius[k−1] < r ≤ radius[k].
struct RadialProfile {
    int n = 0;
    double cell_volume = 0.0;
    std::vector<double> radius;
    std::vector<double> value;

    [[nodiscard]] double operator()(double r) const;
};

/// Symmetric decreasing rearrangement: positive cell values sorted
/// descending, cell k placed at the radius of the ball of volume (k+1)h^n.
[[nodiscard]] RadialProfile rearrangement(const ScalarField& field);

/// The rearrangement laid out on a fresh grid of the same cell size
/// centred at the origin: cells ordered by distance from the centre receive
/// the sorted values.
[[nodiscard]] ScalarField rearranged_field(const ScalarField& field);

/// {u > t} as an implicit domain over the interpolated field; volume is the cell count μ(t).
[[nodiscard]] Domain superlevel_domain(const ScalarField& field, double t);

/// Max relative defect of μ(t) = −(d/dt)∫_{u>t}|∇u|² over the middle 80% of
/// `levels` uniform levels.
[[nodiscard]] double energy_derivative_check(const ScalarField& field, int levels);

/// Two-column CSV "t,mu".
void write_distribution_csv(std::ostream& out, const DistributionFunction& mu);

}  // namespace torsionlab
