#pragma once

#include "torsionlab/geometry.hpp"

#include <string>
#include <vector>

namespace torsionlab {

struct AsymmetryConfig {
    int lattice_divisions = 32;      ///< lattice step = diameter / lattice_divisions
    int refine_starts = 3;           ///< simplex searches started from the best lattice points
    int max_evaluations = 600;       ///< per simplex search
    double center_tolerance = 1e-7;  ///< simplex size at which a search stops, relative to diameter
    int scan_rows = 4096;            ///< 2D: rows across the ball for analytic kinds
    int implicit_rows = 512;         ///< 2D implicit domains: rows across the ball
    int implicit_samples = 256;      ///< 2D implicit domains: samples along each row chord
    int voxel_resolution = 96;       ///< other dimensions: cells across the ball per axis
};

struct AsymmetryStage {
    std::string stage;  ///< "lattice", "simplex", "symmetry" or "shortcut"
    Point center;
    double value = 0.0;
    int evaluations = 0;
};

struct AsymmetryResult {
    double A = 0.0;  ///< best value found; an upper bound on A(D)
    Point center;
    int evaluations = 0;
    bool stagnated = false;
    std::vector<AsymmetryStage> trace;

    [[nodiscard]] std::string to_json() const;
};

/// |D ∩ (c + B)| with B the ball of volume |D| centred at the origin.
[[nodiscard]] double ball_overlap(const Domain& domain, const Point& c, const AsymmetryConfig& cfg = {});

/// |D Δ (c + B)| / |D| = 2 (1 − |D ∩ (c + B)| / |D|).
[[nodiscard]] double symdiff_fraction(const Domain& domain, const Point& c, const AsymmetryConfig& cfg = {});

/// Fraenkel asymmetry: lattice search over centres in the bounding box, then
/// Nelder–Mead refinement from the best lattice points.
[[nodiscard]] AsymmetryResult fraenkel(const Domain& domain, const AsymmetryConfig& cfg = {});

/// Minimum of symdiff_fraction over the lattice of the bounding box with the given step.
[[nodiscard]] AsymmetryResult asymmetry_scan(const Domain& domain, double step, const AsymmetryConfig& cfg = {});

/// (1 − 2k) A_D, the asymmetry retained by a subset U ⊂ D with |D \ U| = k A_D |D|.
[[nodiscard]] double transfer_lower_bound(double A_D, double k);

}  // namespace torsionlab
