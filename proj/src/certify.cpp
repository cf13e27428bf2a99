#include "torsionlab/certify.hpp"

#include "torsionlab/domain_json.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/format.hpp"
#include "torsionlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace torsionlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_p(double p) { return std::isinf(p) ? "inf" : format_double(p); }

const char* solver_name(LifetimeSolver s) {
    switch (s) {
        case LifetimeSolver::grid: return "grid";
        case LifetimeSolver::wos: return "wos";
        case LifetimeSolver::closed_form: return "closed_form";
    }
    return "grid";
}

GridSolveConfig grid_config(const CertifyConfig& cfg, int resolution) {
    GridSolveConfig g;
    g.resolution = resolution;
    g.boundary = cfg.boundary;
    return g;
}

int coarse_resolution(int resolution) { return std::max(16, resolution / 2); }

WosConfig seeded_wos(const CertifyConfig& cfg) {
    WosConfig w = cfg.wos;
    w.seed = cfg.seed;
    return w;
}

TorsionAnalysis analyze_impl(const Domain& domain, const CertifyConfig& cfg, bool with_coarse, bool with_scan) {
    const double vol = volume(domain).value;
    ScalarField field = grid_torsion(domain, grid_config(cfg, cfg.grid_resolution));
    ScalarField coarse = with_coarse ? grid_torsion(domain, grid_config(cfg, coarse_resolution(cfg.grid_resolution))) : field;
    DistributionFunction mu = distribution_function(field, cfg.slices);
    DistributionFunction mu_coarse = with_coarse ? distribution_function(coarse, cfg.slices) : mu;
    AsymmetryResult asym = fraenkel(domain, cfg.asymmetry);
    TorsionAnalysis an{domain, vol, std::move(field), std::move(coarse), std::move(mu), std::move(mu_coarse), std::move(asym), 0.0, false};
    if (with_scan && cfg.scan_validate && !domain.is_ball()) {
        const AsymmetryResult scan = asymmetry_scan(domain, length_scale(domain) / cfg.scan_divisions, cfg.asymmetry);
        an.scan_gap = scan.A - an.asymmetry.A;
        an.scanned = true;
    }
    return an;
}

void require_point(const Domain& domain, const Point& x) {
    if (x.size() != domain.dim()) throw ValidationError("point dimension does not match the domain");
}

/// u at x for the configured solver; points on ∂D give 0.
std::pair<double, double> lifetime_at(const Domain& domain, const ScalarField* field, const ScalarField* coarse,
                                      const Point& x, const CertifyConfig& cfg) {
    require_point(domain, x);
    if (!contains(domain, x)) {
        if (on_boundary(domain, x, 1e-9 * length_scale(domain))) return {0.0, 0.0};
        throw ValidationError("deficit_point: point is outside the domain");
    }
    switch (cfg.solver) {
        case LifetimeSolver::closed_form: {
            const auto u = closed_form_lifetime(domain, x);
            if (!u) throw ValidationError("deficit_point: no closed form for this domain kind");
            return {*u, 0.0};
        }
        case LifetimeSolver::wos: {
            const Estimate e = wos_lifetime(domain, x, seeded_wos(cfg));
            return {e.value, e.std_error};
        }
        case LifetimeSolver::grid: {
            const double u = field->value_at(x);
            return {u, std::abs(u - coarse->value_at(x))};
        }
    }
    return {0.0, 0.0};
}

double field_norm(const ScalarField& f, double p) { return field_lp_norm(f, p); }

double ball_norm(int n, double vol, double p) { return std::isinf(p) ? ball_sup(n, vol) : ball_lp_norm(n, vol, p); }

std::vector<std::pair<std::string, std::string>> config_record(const CertifyConfig& cfg) {
    return {{"solver", solver_name(cfg.solver)},
            {"grid_resolution", std::to_string(cfg.grid_resolution)},
            {"boundary", cfg.boundary == BoundaryTreatment::linear_ghost ? "linear_ghost" : "staircase"},
            {"slices", std::to_string(cfg.slices)},
            {"beta_n", format_double(cfg.beta_n)},
            {"theta", format_double(cfg.theta)},
            {"wos_paths", std::to_string(cfg.wos.paths)},
            {"wos_eps", format_double(cfg.wos.boundary_eps)},
            {"lattice_divisions", std::to_string(cfg.asymmetry.lattice_divisions)}};
}

Certificate base_certificate(const std::string& theorem, const Domain& domain, const CertifyConfig& cfg) {
    Certificate c;
    c.theorem = theorem;
    c.label = domain_label(domain);
    c.domain = domain_to_json(domain);
    c.config = config_record(cfg);
    c.seed = cfg.seed;
    return c;
}

void record_asymmetry(Certificate& c, const TorsionAnalysis& an) {
    c.intermediates.emplace_back("A", an.asymmetry.A);
    if (an.scanned) c.intermediates.emplace_back("asymmetry_scan_gap", an.scan_gap);
    if (an.asymmetry.stagnated) c.notes.push_back("asymmetry optimiser stagnated; A is the best value found");
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y, double& intercept) {
    const auto m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    intercept = (sy - slope * sx) / m;
    return slope;
}

}  // namespace

double kappa(double p) { return std::isinf(p) ? 1.0 : p; }

double Constants::theorem2() const { return std::isinf(p) ? C_inf : C_np; }

Constants constants(int n, double p, double beta_n, double fractional_iso) {
    if (n < 2) throw ValidationError("constants: n must be at least 2");
    if (!(p >= 1.0)) throw ValidationError("constants: p must be at least 1");
    if (!(beta_n > 0.0)) throw ValidationError("constants: beta_n must be positive");
    Constants k;
    k.n = n;
    k.p = p;
    k.omega = unit_ball_volume(n);
    k.beta = beta_n;
    k.fractional_iso = fractional_iso;
    k.C_n = beta_n * std::pow(k.omega, 1.0 / n);
    k.C_tilde = k.C_n / (2.0 * n * std::pow(k.omega, 2.0 / n));
    k.C_inf = std::min(2.0 * beta_n * std::pow(k.omega, -1.0 / n), static_cast<double>(n)) / (32.0 * n * n);
    if (std::isinf(p)) {
        k.ball_norm_unit = ball_sup(n, 1.0);
    } else {
        k.ball_norm_unit = ball_lp_norm(n, 1.0, p);
        k.C_np = std::min(p, 8.0 * k.C_tilde) /
                 (std::pow(2.0, 4.0 * (p + 1.0)) * std::pow(static_cast<double>(n), 2.0 * p) *
                  std::pow(k.omega, 2.0 * p / n) * k.ball_norm_unit);
    }
    return k;
}

TorsionAnalysis analyze(const Domain& domain, const CertifyConfig& cfg) { return analyze_impl(domain, cfg, true, true); }

DeficitEstimate deficit_point(const TorsionAnalysis& an, const Point& x, const CertifyConfig& cfg) {
    const auto [u, su] = lifetime_at(an.domain, &an.field, &an.coarse, x, cfg);
    DeficitEstimate d;
    d.u = u;
    d.u_ball = ball_sup(an.domain.dim(), an.volume);
    d.value = 1.0 - u / d.u_ball;
    d.sigma = su / d.u_ball;
    return d;
}

DeficitEstimate deficit_point(const Domain& domain, const Point& x, const CertifyConfig& cfg) {
    if (cfg.solver == LifetimeSolver::grid) return deficit_point(analyze_impl(domain, cfg, true, false), x, cfg);
    const auto [u, su] = lifetime_at(domain, nullptr, nullptr, x, cfg);
    DeficitEstimate d;
    d.u = u;
    d.u_ball = ball_sup(domain.dim(), volume(domain).value);
    d.value = 1.0 - u / d.u_ball;
    d.sigma = su / d.u_ball;
    return d;
}

DeficitEstimate deficit_lp(const TorsionAnalysis& an, double p) {
    if (!(p >= 1.0)) throw ValidationError("deficit_lp: p must be at least 1");
    DeficitEstimate d;
    d.u = field_norm(an.field, p);
    d.u_ball = ball_norm(an.domain.dim(), an.volume, p);
    d.value = 1.0 - d.u / d.u_ball;
    d.sigma = std::abs(d.u - field_norm(an.coarse, p)) / d.u_ball;
    return d;
}

DeficitEstimate deficit_lp(const Domain& domain, double p, const CertifyConfig& cfg) {
    return deficit_lp(analyze_impl(domain, cfg, true, false), p);
}

std::vector<DeficitEstimate> deficit_lp(const Domain& domain, const std::vector<double>& ps, const CertifyConfig& cfg) {
    if (ps.empty()) throw ValidationError("deficit_lp: no exponents given");
    const TorsionAnalysis an = analyze_impl(domain, cfg, true, false);
    std::vector<DeficitEstimate> out;
    for (double p : ps) out.push_back(deficit_lp(an, p));
    return out;
}

double Certificate::intermediate(const std::string& key) const {
    for (const auto& [k, v] : intermediates)
        if (k == key) return v;
    throw ValidationError("certificate has no intermediate named " + key);
}

nlohmann::json Certificate::to_json() const {
    auto number = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return std::isinf(v) ? (v > 0 ? "inf" : "-inf") : "nan";
    };
    nlohmann::json j;
    j["theorem"] = theorem;
    j["label"] = label;
    j["domain"] = domain;
    nlohmann::json pj = nlohmann::json::object();
    for (const auto& [k, v] : params) pj[k] = number(v);
    j["params"] = pj;
    j["lhs"] = number(lhs);
    j["rhs"] = number(rhs);
    j["margin"] = number(margin);
    j["sigma"] = number(sigma);
    j["pass"] = pass;
    nlohmann::json ij = nlohmann::json::object();
    for (const auto& [k, v] : intermediates) ij[k] = number(v);
    j["intermediates"] = ij;
    nlohmann::json cj = nlohmann::json::object();
    for (const auto& [k, v] : config) cj[k] = v;
    j["config"] = cj;
    j["seed"] = seed;
    j["notes"] = notes;
    return j;
}

Certificate certificate_from_json(const nlohmann::json& doc) {
    auto number = [](const nlohmann::json& v) {
        if (v.is_number()) return v.get<double>();
        const auto text = v.get<std::string>();
        if (text == "inf") return kInf;
        if (text == "-inf") return -kInf;
        return std::numeric_limits<double>::quiet_NaN();
    };
    try {
        Certificate c;
        c.theorem = doc.at("theorem").get<std::string>();
        c.label = doc.at("label").get<std::string>();
        c.domain = doc.at("domain");
        for (const auto& [k, v] : doc.at("params").items()) c.params.emplace_back(k, number(v));
        c.lhs = number(doc.at("lhs"));
        c.rhs = number(doc.at("rhs"));
        c.margin = number(doc.at("margin"));
        c.sigma = number(doc.at("sigma"));
        c.pass = doc.at("pass").get<bool>();
        for (const auto& [k, v] : doc.at("intermediates").items()) c.intermediates.emplace_back(k, number(v));
        for (const auto& [k, v] : doc.at("config").items()) c.config.emplace_back(k, v.get<std::string>());
        c.seed = doc.at("seed").get<std::uint64_t>();
        c.notes = doc.at("notes").get<std::vector<std::string>>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("certificate: ") + e.what());
    }
}

std::string certificate_csv_header() { return "theorem,domain,param,lhs,rhs,margin,sigma,pass"; }

std::string certificate_csv_row(const Certificate& c) {
    std::ostringstream param;
    for (std::size_t i = 0; i < c.params.size(); ++i) {
        if (i) param << ';';
        param << c.params[i].first << '=' << format_p(c.params[i].second);
    }
    std::ostringstream row;
    row << c.theorem << ',' << c.label << ',' << param.str() << ',' << format_double(c.lhs) << ','
        << format_double(c.rhs) << ',' << format_double(c.margin) << ',' << format_double(c.sigma) << ','
        << (c.pass ? "true" : "false");
    return row.str();
}

std::string domain_label(const Domain& domain) {
    std::ostringstream out;
    auto vec = [&](const Point& p) {
        for (Eigen::Index i = 0; i < p.size(); ++i) out << (i ? ";" : "") << format_double(p[i]);
    };
    switch (domain.kind()) {
        case DomainKind::ball: {
            const auto& b = domain.as<BallShape>();
            out << "ball(n=" << domain.dim() << ";r=" << format_double(b.radius) << ")";
            break;
        }
        case DomainKind::ellipse: {
            const auto& e = domain.as<EllipseShape>();
            out << "ellipse(" << format_double(e.semi_x) << ";" << format_double(e.semi_y) << ")";
            break;
        }
        case DomainKind::rectangle: {
            const auto& r = domain.as<RectangleShape>();
            out << "rectangle(";
            vec(r.lo);
            out << ";";
            vec(r.hi);
            out << ")";
            break;
        }
        case DomainKind::polygon:
            out << "polygon(" << domain.as<PolygonShape>().vertices.size() << " vertices)";
            break;
        case DomainKind::stadium:
            out << "stadium(r=" << format_double(domain.as<StadiumShape>().radius) << ")";
            break;
        case DomainKind::implicit:
            out << domain.as<ImplicitShape>().label;
            break;
    }
    return out.str();
}

Certificate certify_thm1(const TorsionAnalysis& an, const Point& x, const CertifyConfig& cfg) {
    const int n = an.domain.dim();
    const double A = an.asymmetry.A;
    const Constants k = constants(n, 1.0, cfg.beta_n, cfg.fractional_iso);
    const double vscale = std::pow(an.volume, -2.0 / n);

    struct Side {
        double mu_u, t_star, first, second, rhs;
    };
    auto assemble = [&](const DistributionFunction& mu, double u) {
        Side s{};
        s.mu_u = mu(u);
        s.first = vscale * std::pow(s.mu_u, 2.0 / n);
        if (A > 0.0) {
            s.t_star = t_star(mu, A, cfg.theta);
            s.second = vscale * k.C_n * std::min(u, s.t_star) * A * A;
        }
        s.rhs = s.first + s.second;
        return s;
    };

    const DeficitEstimate d = deficit_point(an, x, cfg);
    const Side fine = assemble(an.mu, d.u);

    Certificate c = base_certificate("1", an.domain, cfg);
    for (Eigen::Index i = 0; i < x.size(); ++i) c.params.emplace_back("x" + std::to_string(i), x[i]);
    c.lhs = d.value;
    c.rhs = fine.rhs;
    c.margin = c.lhs - c.rhs;
    if (cfg.solver == LifetimeSolver::grid) {
        const double uc = contains(an.domain, x) ? an.coarse.value_at(x) : 0.0;
        const Side coarse = assemble(an.mu_coarse, uc);
        const double margin_c = (1.0 - uc / d.u_ball) - coarse.rhs;
        c.sigma = std::abs(c.margin - margin_c);
    } else {
        const double su = d.sigma * d.u_ball;
        const Side hi = assemble(an.mu, d.u + su);
        const Side lo = assemble(an.mu, std::max(0.0, d.u - su));
        c.sigma = d.sigma + 0.5 * std::abs(hi.rhs - lo.rhs);
    }
    c.pass = c.margin + 3.0 * c.sigma >= 0.0;
    if (A <= 0.0) c.notes.push_back("A(D) = 0: reduced inequality δ ≥ |D|^{-2/n} μ(u(x))^{2/n}");
    c.intermediates = {{"u", d.u},
                       {"u_ball", d.u_ball},
                       {"volume", an.volume},
                       {"mu_u", fine.mu_u},
                       {"t_star", fine.t_star},
                       {"C_n", k.C_n},
                       {"first_term", fine.first},
                       {"second_term", fine.second}};
    record_asymmetry(c, an);
    c.params.emplace_back("theta", cfg.theta);
    c.params.emplace_back("beta_n", cfg.beta_n);
    return c;
}

Certificate certify_thm1(const Domain& domain, const Point& x, const CertifyConfig& cfg) {
    return certify_thm1(analyze(domain, cfg), x, cfg);
}

Certificate certify_thm2(const TorsionAnalysis& an, double p, const CertifyConfig& cfg) {
    const int n = an.domain.dim();
    if (n < 2) throw ValidationError("certify_thm2: n must be at least 2");
    const double A = an.asymmetry.A;
    const Constants k = constants(n, p, cfg.beta_n, cfg.fractional_iso);
    const DeficitEstimate d = deficit_lp(an, p);
    const double exponent = 2.0 + kappa(p);

    Certificate c = base_certificate("2", an.domain, cfg);
    c.params.emplace_back("p", p);
    c.params.emplace_back("beta_n", cfg.beta_n);
    c.lhs = d.value;
    c.rhs = k.theorem2() * std::pow(A, exponent);
    c.margin = c.lhs - c.rhs;
    c.sigma = d.sigma;
    c.pass = c.margin + 3.0 * c.sigma >= 0.0;
    c.intermediates = {{"norm_D", d.u}, {"norm_B", d.u_ball}, {"volume", an.volume}, {"C_np", k.theorem2()}, {"exponent", exponent}};
    if (!std::isinf(p) && p == 1.0) {
        const double TB = d.u_ball, TD = d.u;
        const double sv_lhs = TB - TD;
        const double sv_rhs = k.C_np * TB * A * A * A;
        const double sv_sigma = d.sigma * TB;
        const double norm = std::pow(an.volume, -(n + 2.0) / n);
        c.intermediates.emplace_back("saint_venant_lhs", sv_lhs);
        c.intermediates.emplace_back("saint_venant_rhs", sv_rhs);
        c.intermediates.emplace_back("saint_venant_margin", sv_lhs - sv_rhs);
        c.intermediates.emplace_back("saint_venant_sigma", sv_sigma);
        c.intermediates.emplace_back("normalized_T_B", norm * TB);
        c.intermediates.emplace_back("normalized_T_D", norm * TD);
        c.pass = c.pass && (sv_lhs - sv_rhs + 3.0 * sv_sigma >= 0.0);
    }
    record_asymmetry(c, an);
    return c;
}

Certificate certify_thm2(const Domain& domain, double p, const CertifyConfig& cfg) {
    return certify_thm2(analyze(domain, cfg), p, cfg);
}

Certificate certify_thm3(const Domain& domain, const CertifyConfig& cfg) {
    const int n = domain.dim();
    const double alpha = cfg.fractional.alpha;
    if (!(alpha > 0.0 && alpha < 2.0)) throw ValidationError("certify_thm3: alpha must lie in (0, 2)");
    const double vol = volume(domain).value;
    const Domain unit = scale(domain, std::pow(vol, -1.0 / n));

    FractionalConfig frac = cfg.fractional;
    frac.seed = cfg.seed;
    Certificate c = base_certificate("3", unit, cfg);
    c.params.emplace_back("alpha", alpha);
    c.params.emplace_back("theta", 1.0 / 9.0);
    double amplitude_sigma = 0.0;
    if (!(frac.ball_amplitude > 0.0)) {
        StablePathConfig sc = cfg.calibration;
        sc.seed = cfg.seed;
        const Estimate cal = calibrate_ball_amplitude(n, alpha, sc);
        frac.ball_amplitude = cal.value;
        amplitude_sigma = cal.std_error;
        c.notes.push_back("ball amplitude calibrated by path simulation");
    }
    const double TB = stable_ball_rigidity(frac, n, 1.0);
    const Estimate TD = fractional_rigidity(unit, frac, cfg.rigidity);
    for (const auto& w : TD.warnings) c.notes.push_back(w);
    const double A = unit.is_ball() ? 0.0 : fraenkel(unit, cfg.asymmetry).A;
    const double diff = TB - TD.value;

    c.intermediates = {{"T_alpha_B", TB},
                       {"T_alpha_D", TD.value},
                       {"T_alpha_D_sigma", TD.std_error},
                       {"ball_amplitude", frac.ball_amplitude},
                       {"ball_amplitude_sigma", amplitude_sigma},
                       {"A", A}};
    if (A > 0.0) {
        const double scale_A = std::pow(A, 2.0 + 2.0 / alpha);
        c.lhs = diff / scale_A;
        c.rhs = 0.0;
        c.margin = c.lhs;
        c.sigma = TD.std_error / scale_A;
        c.pass = c.lhs - 3.0 * c.sigma > 0.0 && diff > 0.0;
        c.intermediates.emplace_back("A_power", scale_A);
        // Both rigidities are linear in the amplitude: its error rescales ρ
        // without changing its sign.
        c.notes.push_back("lhs is the ratio (T_alpha(B) - T_alpha(D)) / A^(2+2/alpha); the theorem's constant is unspecified");
    } else {
        c.lhs = diff;
        c.rhs = 0.0;
        c.margin = diff;
        c.sigma = TD.std_error;
        c.pass = std::abs(diff) <= 3.0 * c.sigma;
        c.notes.push_back("A(D) = 0: checks T_alpha(B) = T_alpha(D) within 3 sigma");
    }
    return c;
}

Certificate check_psz(const Domain& domain, const CertifyConfig& cfg) {
    const int n = domain.dim();
    const double alpha = cfg.fractional.alpha;
    if (!(alpha > 0.0 && alpha < 2.0)) throw ValidationError("check_psz: alpha must lie in (0, 2)");
    const double vol = volume(domain).value;
    const double A = domain.is_ball() ? 0.0 : fraenkel(domain, cfg.asymmetry).A;

    auto gap_at = [&](int resolution, ScalarField* keep) {
        ScalarField f = grid_torsion(domain, grid_config(cfg, resolution));
        const double su = fractional_seminorm(f, alpha, 1.0).value;
        const double ss = fractional_seminorm(rearranged_field(f), alpha, 1.0).value;
        if (keep) *keep = std::move(f);
        return std::make_pair(su, ss);
    };
    ScalarField field;
    const auto [su, ss] = gap_at(cfg.seminorm_resolution, &field);
    const auto [suc, ssc] = gap_at(coarse_resolution(cfg.seminorm_resolution), nullptr);

    Certificate c = base_certificate("psz", domain, cfg);
    c.params.emplace_back("alpha", alpha);
    c.params.emplace_back("theta", cfg.theta);
    c.lhs = su;
    c.rhs = ss;
    c.margin = su - ss;
    c.sigma = std::abs(c.margin - (suc - ssc));
    c.intermediates = {{"seminorm_u", su}, {"seminorm_rearranged", ss}, {"A", A}, {"volume", vol}};
    if (A > 0.0) {
        const DistributionFunction mu = distribution_function(field, cfg.slices);
        const double ts = t_star(mu, A, cfg.theta);
        const double r = 2.0 * n / (2.0 * n - alpha);
        const double term1 = ts * std::pow(vol, (2.0 * n - alpha) / (2.0 * n));
        double sum = 0.0;
        for (double v : field.values) sum += std::pow(std::min(v, ts), r);
        const double term2 = std::pow(field.grid.cell_volume() * sum, 1.0 / r);
        const double remainder = std::pow(A, 2.0 / alpha) * std::max(term1, term2);
        c.intermediates.emplace_back("t_star", ts);
        c.intermediates.emplace_back("t_star_volume_term", term1);
        c.intermediates.emplace_back("truncated_norm_term", term2);
        c.intermediates.emplace_back("selected_term", term1 >= term2 ? 1.0 : 2.0);
        c.intermediates.emplace_back("implied_constant", c.margin / remainder);
        c.pass = c.margin > 0.0;
    } else {
        c.pass = std::abs(c.margin) <= 0.05 * ss;
        c.notes.push_back("A(D) = 0: checks [u] = [u*] within 5%");
    }
    return c;
}

TransferReport transfer_check(const TorsionAnalysis& an, int levels, const CertifyConfig& cfg, double slack) {
    if (levels < 1) throw ValidationError("transfer_check: levels must be positive");
    const double A = an.asymmetry.A;
    if (!(A > 0.0)) throw ValidationError("transfer_check: requires A(D) > 0");
    TransferReport rep;
    rep.A = A;
    rep.t_star = t_star(an.mu, A, cfg.theta);
    rep.pass = true;
    for (int j = 1; j <= levels; ++j) {
        TransferSample s;
        s.t = rep.t_star * (static_cast<double>(j) / levels) * (1.0 - 1e-6);
        const Domain level = superlevel_domain(an.field, s.t);
        s.k = (an.volume - volume(level).value) / (an.volume * A);
        if (!(s.k < 0.5)) throw SolverError("transfer_check: level set lost half the asymmetry budget");
        s.bound = s.k > 0.0 ? transfer_lower_bound(A, s.k) : A;
        s.A_level = fraenkel(level, cfg.asymmetry).A;
        s.pass = s.A_level >= s.bound - slack;
        rep.pass = rep.pass && s.pass;
        rep.samples.push_back(s);
    }
    return rep;
}

FitReport ellipse_asymptotics(const std::vector<double>& eps, double p, const CertifyConfig& cfg) {
    if (eps.size() < 4) throw ValidationError("ellipse_asymptotics: at least 4 eps values required");
    for (double e : eps)
        if (!(e > 0.0 && e <= 0.3)) throw ValidationError("ellipse_asymptotics: eps values must lie in (0, 0.3]");
    FitReport r;
    r.p = p;
    r.eps = eps;
    for (double e : eps) {
        const Domain D = Domain::ellipse(e);
        const ScalarField f = grid_torsion(D, grid_config(cfg, cfg.grid_resolution));
        const double vol = volume(D).value;
        const double delta = 1.0 - field_norm(f, p) / ball_norm(2, vol, p);
        r.deficit.push_back(delta);
        r.asymmetry.push_back(fraenkel(D, cfg.asymmetry).A);
        r.ratio.push_back(delta / std::pow(e, 2.5));
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(r.deficit[i] > 0.0)) throw SolverError("ellipse_asymptotics: non-positive deficit; refine the grid");
        lx.push_back(std::log(eps[i]));
        ly.push_back(std::log(r.deficit[i]));
    }
    r.deficit_slope = least_squares_slope(lx, ly, r.deficit_intercept);
    r.asymmetry_slope = least_squares_slope(eps, r.asymmetry, r.asymmetry_intercept);
    std::vector<std::size_t> order(eps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eps[a] < eps[b]; });
    r.ratio_increases_as_eps_decreases = true;
    for (std::size_t i = 0; i + 1 < order.size(); ++i)
        if (!(r.ratio[order[i]] > r.ratio[order[i + 1]])) r.ratio_increases_as_eps_decreases = false;
    return r;
}

double ScalingReport::max() const { return std::max({deficit, mu, t_star}); }

ScalingReport scaling_check(const Domain& domain, double r, const Point& x, const CertifyConfig& cfg) {
    if (!(r > 0.0)) throw ValidationError("scaling_check: r must be positive");
    require_point(domain, x);
    if (!contains(domain, x)) throw ValidationError("scaling_check: point is outside the domain");
    const Domain big = scale(domain, r);
    const Point rx = r * x;
    const int n = domain.dim();
    auto rel = [](double a, double b) {
        const double m = std::max(std::abs(a), std::abs(b));
        return m < 1e-14 ? 0.0 : std::abs(a - b) / m;
    };
    ScalingReport rep;
    if (cfg.solver == LifetimeSolver::closed_form && domain.is_ball()) {
        rep.deficit = rel(deficit_point(domain, x, cfg).value, deficit_point(big, rx, cfg).value);
        const double v = volume(domain).value, vb = volume(big).value;
        const double top = ball_sup(n, v);
        for (int k = 1; k < 10; ++k) {
            const double t = top * k / 10.0;
            rep.mu = std::max(rep.mu, rel(ball_distribution(n, v, t), std::pow(r, -n) * ball_distribution(n, vb, r * r * t)));
        }
        return rep;
    }
    CertifyConfig c = cfg;
    if (c.solver == LifetimeSolver::closed_form) c.solver = LifetimeSolver::grid;
    const TorsionAnalysis a = analyze_impl(domain, c, false, false);
    const TorsionAnalysis b = analyze_impl(big, c, false, false);
    rep.deficit = rel(deficit_point(a, x, c).value, deficit_point(b, rx, c).value);
    const double top = a.field.max_value();
    for (int k = 1; k < 10; ++k) {
        const double t = top * k / 10.0;
        rep.mu = std::max(rep.mu, rel(a.mu(t), std::pow(r, -n) * b.mu(r * r * t)));
    }
    if (a.asymmetry.A > 0.0) rep.t_star = rel(t_star(a.mu, a.asymmetry.A, c.theta), t_star(b.mu, a.asymmetry.A, c.theta) / (r * r));
    return rep;
}

std::vector<Certificate> sweep(const SweepRequest& request, const CertifyConfig& cfg) {
    if (request.eps.empty()) throw ValidationError("sweep: empty parameter list");
    std::vector<Certificate> out;
    for (double e : request.eps) {
        const Domain D = Domain::ellipse(e);
        const bool brownian = std::any_of(request.theorems.begin(), request.theorems.end(),
                                          [](const std::string& t) { return t == "1" || t == "2"; });
        std::optional<TorsionAnalysis> an;
        if (brownian) an.emplace(analyze(D, cfg));
        for (const auto& th : request.theorems) {
            if (th == "1") {
                out.push_back(certify_thm1(*an, Point::Zero(2), cfg));
            } else if (th == "2") {
                for (double p : request.ps) out.push_back(certify_thm2(*an, p, cfg));
            } else if (th == "3" || th == "psz") {
                for (double a : request.alphas) {
                    CertifyConfig c = cfg;
                    c.fractional.alpha = a;
                    out.push_back(th == "3" ? certify_thm3(D, c) : check_psz(D, c));
                }
            } else {
                throw ValidationError("sweep: unknown theorem '" + th + "'");
            }
        }
    }
    return out;
}

}  // namespace torsionlab
