#pragma once

#include "torsionlab/brownian.hpp"
#include "torsionlab/field.hpp"
#include "torsionlab/geometry.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace torsionlab {

/// A_{n,α} = 2^α Γ((n+α)/2) / (π^{n/2} |Γ(−α/2)|), the constant in the
/// singular-integral form of (−Δ)^{α/2}.
[[nodiscard]] double fractional_laplacian_constant(int n, double alpha);

struct FractionalConfig {
    double alpha = 1.0;
    double normalization = 0.0;    ///< A_{n,α}; 0 selects fractional_laplacian_constant
    double ball_amplitude = 0.0;   ///< C in u_B(x) = C (R² − |x|²)^{α/2}; must be supplied
    double cutoff = 0.0;           ///< seminorm exterior cutoff; 0 selects 2 · grid diameter
    std::size_t paths = 20000;
    std::uint64_t seed = 1;
    int max_steps = 100000;
    int overshoot_nodes = 4096;
};

/// Inverse CDF of the radial exit position ρ = |X_τ − x|/r of a symmetric
/// α-stable process leaving the ball B(x, r) from its centre. 1/ρ² follows
/// Beta(α/2, 1 − α/2) in every dimension.
class OvershootTable {
public:
    OvershootTable(double alpha, int nodes);

    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] int nodes() const { return static_cast<int>(log_eta_.size()); }
    /// ρ ≥ 1 for u ∈ (0, 1).
    [[nodiscard]] double sample(double u) const;
    /// P(ρ ≤ rho), evaluated directly rather than from the table.
    [[nodiscard]] double cdf(double rho) const;

    /// {"alpha", "nodes", "log_eta", "logit"} for persistence.
    [[nodiscard]] std::string to_json() const;
    [[nodiscard]] static OvershootTable from_json(const std::string& text);

private:
    OvershootTable() = default;
    double alpha_ = 0.0;
    std::vector<double> log_eta_;  ///< log(ρ − 1) at the nodes
    std::vector<double> logit_;    ///< log(F / (1 − F)) at the nodes
};

/// Shared, lazily built table for (α, nodes).
[[nodiscard]] std::shared_ptr<const OvershootTable> overshoot_table(double alpha, int nodes = 4096);

/// C (R² − |x|²)^{α/2} with the configured amplitude.
[[nodiscard]] double stable_ball_lifetime(const FractionalConfig& cfg, double R, const Point& x, int n);

/// T_α of the ball of the given volume: C (n/2) ω_n R^{n+α} B(n/2, 1 + α/2).
[[nodiscard]] double stable_ball_rigidity(const FractionalConfig& cfg, int n, double volume);

struct StablePathConfig {
    /// Δt = exit_miss · d^α at boundary distance d, so a step's increment
    /// exceeds d with probability of order exit_miss.
    double exit_miss = 0.002;
    /// α = 2 only: Δt = max((brownian_step_fraction · d)², brownian_min_step · diam²).
    double brownian_step_fraction = 0.1;
    double brownian_min_step = 1e-6;
    std::size_t paths = 40000;
    std::uint64_t seed = 1;
    int max_steps = 1000000;
};

/// Positive (α/2)-stable variate with Laplace transform exp(−λ^{α/2}) (Kanter).
[[nodiscard]] double positive_stable_variate(double beta, double u, double w);

/// E^x[τ_D] for the process with generator −(−Δ)^{α/2}, by direct path
/// simulation: subordinated Gaussian increments on an adaptive time step.
/// α = 2 simulates Brownian motion with a bridge crossing correction.
[[nodiscard]] Estimate stable_path_lifetime(const Domain& domain, const Point& x, double alpha,
                                            const StablePathConfig& cfg = {});

/// E^0[τ_{B_1}] by path simulation, i.e. the ball amplitude C_{n,α}.
[[nodiscard]] Estimate calibrate_ball_amplitude(int n, double alpha, const StablePathConfig& cfg = {});

/// Stable walk-on-spheres: accumulates C r_k^α per inscribed ball and jumps
/// by the exact exit law until the walker lands outside D.
[[nodiscard]] Estimate stable_wos_lifetime(const Domain& domain, const Point& x, const FractionalConfig& cfg);

struct RigidityConfig {
    int resolution = 128;      ///< sample cells along the longest side
    int samples_per_cell = 2;  ///< jittered points per cell, one walk each
};

/// ∫_D u_D^α by stratified Monte Carlo: jittered points in every grid cell,
/// one stable walk per point.
[[nodiscard]] Estimate fractional_rigidity(const Domain& domain, const FractionalConfig& cfg,
                                           const RigidityConfig& sampling = {});

struct SeminormResult {
    double value = 0.0;     ///< [u]_{α,p}
    double integral = 0.0;  ///< the double integral, [u]^p
    double interior = 0.0;  ///< pairs of grid cells
    double exterior = 0.0;  ///< one point outside the grid, lattice part
    double tail = 0.0;      ///< one point beyond the cutoff, analytic part
    double shell = 0.0;     ///< diagonal cells, Taylor model
    double cutoff = 0.0;
    double exponent = 0.0;  ///< s = αp/2 in the kernel |x − y|^{−n−s}
};

/// [u]_{α,p} = (∫∫ |u(x) − u(y)|^p |x − y|^{−n−αp/2} dx dy)^{1/p} with u = 0
/// off the mask and outside the grid.
[[nodiscard]] SeminormResult fractional_seminorm(const ScalarField& field, double alpha, double p, double cutoff = 0.0);

/// P_α(D) = ½ [χ_D]_{α,1}, with χ_D sampled on grid_for(D, resolution).
[[nodiscard]] double fractional_perimeter(const Domain& domain, double alpha, int resolution, double cutoff = 0.0);

struct CoareaResult {
    double seminorm = 0.0;  ///< [u]_{α,1}
    double layered = 0.0;   ///< 2 ∫ P_α({u > t}) dt by midpoint slices
    std::vector<double> levels;
    std::vector<double> perimeters;
};

[[nodiscard]] CoareaResult fractional_coarea(const ScalarField& field, double alpha, int slices = 64, double cutoff = 0.0);

/// 2‖v‖₁ − (A_{n,α}/2)[v]²_{α,2}; bounded above by T_α(D) for test fields v.
[[nodiscard]] double fractional_energy_bound(const ScalarField& test, double alpha, double normalization = 0.0);

}  // namespace torsionlab
