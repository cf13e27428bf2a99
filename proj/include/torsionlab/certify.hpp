#pragma once

#include "torsionlab/asymmetry.hpp"
#include "torsionlab/brownian.hpp"
#include "torsionlab/field.hpp"
#include "torsionlab/levels.hpp"
#include "torsionlab/stable.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace torsionlab {

/// κ(p) = p for finite p, 1 for p = ∞.
[[nodiscard]] double kappa(double p);

struct Constants {
    int n = 2;
    double p = 1.0;
    double omega = 0.0;            ///< ω_n
    double beta = 0.0;             ///< quantitative isoperimetric constant β_n
    double fractional_iso = 0.0;   ///< B_{n,α}, recorded only
    double C_n = 0.0;              ///< β_n ω_n^{1/n}
    double C_tilde = 0.0;          ///< C_n / (2n ω_n^{2/n})
    double ball_norm_unit = 0.0;   ///< ‖u_B‖_p^p at |B| = 1 (finite p)
    double C_np = 0.0;             ///< C_{n,p} for finite p
    double C_inf = 0.0;            ///< C_{n,∞}
    /// C_{n,p} or C_{n,∞} as selected by p.
    [[nodiscard]] double theorem2() const;
};

[[nodiscard]] Constants constants(int n, double p, double beta_n, double fractional_iso = 0.0);

enum class LifetimeSolver { grid, wos, closed_form };

struct CertifyConfig {
    double beta_n = 0.1;
    double fractional_iso = 0.1;
    double theta = 0.25;
    int grid_resolution = 256;  ///< the uncertainty run uses half of it
    BoundaryTreatment boundary = BoundaryTreatment::linear_ghost;
    int slices = 256;
    LifetimeSolver solver = LifetimeSolver::grid;
    WosConfig wos;
    AsymmetryConfig asymmetry;
    bool scan_validate = true;  ///< compare the optimiser against an exhaustive centre scan
    int scan_divisions = 64;
    FractionalConfig fractional;  ///< α and ball amplitude; amplitude 0 triggers calibration
    RigidityConfig rigidity{200, 2};
    StablePathConfig calibration;
    int seminorm_resolution = 128;
    std::uint64_t seed = 1;
};

/// Grid solutions, level tables and asymmetry of one domain, shared by its certificates.
struct TorsionAnalysis {
    Domain domain;
    double volume = 0.0;
    ScalarField field;
    ScalarField coarse;
    DistributionFunction mu;
    DistributionFunction mu_coarse;
    AsymmetryResult asymmetry;
    double scan_gap = 0.0;  ///< scan minimum minus optimiser value (≥ 0 when the optimiser wins)
    bool scanned = false;
};

[[nodiscard]] TorsionAnalysis analyze(const Domain& domain, const CertifyConfig& cfg);

struct DeficitEstimate {
    double value = 0.0;
    double sigma = 0.0;
    double u = 0.0;       ///< u_D(x), or ‖u_D‖_p^p (sup for p = ∞)
    double u_ball = 0.0;  ///< u_B(0), or ‖u_B‖_p^p (sup for p = ∞)
};

/// δ(x, D) = 1 − u_D(x)/u_B(0) with |B| = |D|.
[[nodiscard]] DeficitEstimate deficit_point(const Domain& domain, const Point& x, const CertifyConfig& cfg);
[[nodiscard]] DeficitEstimate deficit_point(const TorsionAnalysis& an, const Point& x, const CertifyConfig& cfg);

/// δ_p(D) = 1 − (‖u_D‖_p/‖u_B‖_p)^{κ(p)}.
[[nodiscard]] DeficitEstimate deficit_lp(const Domain& domain, double p, const CertifyConfig& cfg);
[[nodiscard]] DeficitEstimate deficit_lp(const TorsionAnalysis& an, double p);
/// One grid analysis shared by every exponent in ps.
[[nodiscard]] std::vector<DeficitEstimate> deficit_lp(const Domain& domain, const std::vector<double>& ps,
                                                    const CertifyConfig& cfg);

struct Certificate {
    std::string theorem;
    std::string label;
    nlohmann::json domain;
    std::vector<std::pair<std::string, double>> params;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double sigma = 0.0;
    bool pass = false;
    std::vector<std::pair<std::string, double>> intermediates;
    std::vector<std::pair<std::string, std::string>> config;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;

    [[nodiscard]] double intermediate(const std::string& key) const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Inverse of Certificate::to_json; keyed tables come back in sorted key order.
[[nodiscard]] Certificate certificate_from_json(const nlohmann::json& doc);

[[nodiscard]] std::string certificate_csv_header();
[[nodiscard]] std::string certificate_csv_row(const Certificate& cert);

/// Short human-readable domain name, e.g. "ellipse(1,1.5)".
[[nodiscard]] std::string domain_label(const Domain& domain);

/// δ(x,D) ≥ |D|^{−2/n}(μ(u_D(x))^{2/n} + C_n (u_D(x) ∧ t*) A(D)²); the
/// second term is dropped when A(D) = 0.
[[nodiscard]] Certificate certify_thm1(const TorsionAnalysis& an, const Point& x, const CertifyConfig& cfg);
[[nodiscard]] Certificate certify_thm1(const Domain& domain, const Point& x, const CertifyConfig& cfg);

/// δ_p(D) ≥ C_{n,p} A(D)^{2+κ(p)}; p = 1 also checks T(B) − T(D) ≥ C_{n,1} T(B) A(D)³.
[[nodiscard]] Certificate certify_thm2(const TorsionAnalysis& an, double p, const CertifyConfig& cfg);
[[nodiscard]] Certificate certify_thm2(const Domain& domain, double p, const CertifyConfig& cfg);

/// ρ = (T_α(B) − T_α(D)) / A(D)^{2+2/α} on D rescaled to unit volume.
[[nodiscard]] Certificate certify_thm3(const Domain& domain, const CertifyConfig& cfg);

/// Gap [u]_{α,1} − [u*]_{α,1} for the torsion function and its rearrangement.
[[nodiscard]] Certificate check_psz(const Domain& domain, const CertifyConfig& cfg);

struct TransferSample {
    double t = 0.0;
    double k = 0.0;        ///< |D \ D_t| / (|D| A(D))
    double A_level = 0.0;  ///< A(D_t)
    double bound = 0.0;    ///< (1 − 2k) A(D)
    bool pass = false;     ///< A_level ≥ bound − slack
};

struct TransferReport {
    double A = 0.0;
    double t_star = 0.0;
    std::vector<TransferSample> samples;
    bool pass = false;
};

/// Measures A(D_t) on `levels` super-level sets with t < t* and compares it with
/// the transferred bound; requires A(D) > 0.
[[nodiscard]] TransferReport transfer_check(const TorsionAnalysis& an, int levels, const CertifyConfig& cfg,
                                            double slack = 1e-2);

struct FitReport {
    double p = 1.0;
    std::vector<double> eps;
    std::vector<double> deficit;
    std::vector<double> asymmetry;
    std::vector<double> ratio;  ///< δ_p / ε^{2.5}
    double deficit_slope = 0.0;
    double deficit_intercept = 0.0;
    double asymmetry_slope = 0.0;
    double asymmetry_intercept = 0.0;
    bool ratio_increases_as_eps_decreases = false;
};

/// Least-squares fits of log δ_p against log ε and of A against ε on the ellipse family.
[[nodiscard]] FitReport ellipse_asymptotics(const std::vector<double>& eps, double p, const CertifyConfig& cfg);

struct ScalingReport {
    double deficit = 0.0;
    double mu = 0.0;
    double t_star = 0.0;
    [[nodiscard]] double max() const;
};

/// Relative defects of δ(x,D) = δ(rx,rD), μ_D(t) = r^{−n}μ_{rD}(r²t) and t*(D) = r^{−2}t*(rD).
[[nodiscard]] ScalingReport scaling_check(const Domain& domain, double r, const Point& x, const CertifyConfig& cfg);

struct SweepRequest {
    std::vector<double> eps;
    std::vector<std::string> theorems{"1", "2"};
    std::vector<double> ps{1.0, 2.0, std::numeric_limits<double>::infinity()};
    std::vector<double> alphas{1.0};
};

/// Certificates over the ellipse family: one row per (ε, theorem, p or α).
[[nodiscard]] std::vector<Certificate> sweep(const SweepRequest& request, const CertifyConfig& cfg);

}  // namespace torsionlab
