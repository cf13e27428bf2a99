#include "torsionlab/asymmetry.hpp"
#include "torsionlab/brownian.hpp"
#include "torsionlab/cache.hpp"
#include "torsionlab/certify.hpp"
#include "torsionlab/domain_json.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/format.hpp"
#include "torsionlab/levels.hpp"
#include "torsionlab/parallel.hpp"
#include "torsionlab/report.hpp"
#include "torsionlab/stable.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

using namespace torsionlab;
using nlohmann::json;

namespace {

struct Options {
    std::string command;
    std::string domain_path;
    std::string theorem;
    std::vector<std::string> p = {};
    std::vector<double> alpha = {};
    std::string point;
    std::string solver = "grid";
    int grid_res = 256;
    int wos_paths = 100000;
    double wos_eps = 0.0;
    double beta_n = 0.1;
    double theta = 0.25;
    std::uint64_t seed = 1;
    std::string cache_dir;
    bool no_cache = false;
    std::string out;
    std::string format = "json";
    std::string eps_list = "0.05,0.1,0.15,0.2,0.25";
    int threads = 0;
    int dim = 2;
    int paths = 0;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, sep))
        if (!item.empty()) parts.push_back(item);
    return parts;
}

double parse_number(const std::string& text, const std::string& what) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("invalid " + what + " '" + text + "'");
    }
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& s : split(text, ',')) out.push_back(parse_number(s, what));
    if (out.empty()) throw ValidationError("empty " + what + " list");
    return out;
}

std::vector<double> p_values(const Options& o, std::vector<double> fallback) {
    if (o.p.empty()) return fallback;
    std::vector<double> ps;
    for (const auto& s : o.p)
        for (double v : parse_list(s, "p")) ps.push_back(v);
    for (double v : ps)
        if (!(v >= 1.0)) throw ValidationError("p must be at least 1");
    return ps;
}

Domain load_domain(const Options& o) {
    if (o.domain_path.empty()) throw ValidationError("--domain is required for '" + o.command + "'");
    std::ifstream in(o.domain_path);
    if (!in) throw ValidationError("cannot read domain file " + o.domain_path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_domain_spec(buf.str());
}

LifetimeSolver parse_solver(const std::string& name) {
    if (name == "grid") return LifetimeSolver::grid;
    if (name == "wos") return LifetimeSolver::wos;
    if (name == "closed-form") return LifetimeSolver::closed_form;
    throw ValidationError("unknown solver '" + name + "'");
}

CertifyConfig certify_config(const Options& o) {
    if (o.grid_res < 16) throw ValidationError("--grid-res must be at least 16");
    if (o.wos_paths < 1) throw ValidationError("--wos-paths must be positive");
    CertifyConfig cfg;
    cfg.grid_resolution = o.grid_res;
    cfg.wos.paths = o.wos_paths;
    cfg.wos.boundary_eps = o.wos_eps;
    cfg.beta_n = o.beta_n;
    cfg.theta = o.theta;
    cfg.seed = o.seed;
    cfg.solver = parse_solver(o.solver);
    if (!o.alpha.empty()) cfg.fractional.alpha = o.alpha.front();
    if (o.paths > 0) cfg.calibration.paths = o.paths;
    return cfg;
}

/// Everything that determines the payload; rendering options are excluded.
json run_config(const Options& o) {
    json p = json::array();
    for (const auto& s : o.p) p.push_back(s);
    return {{"theorem", o.theorem}, {"p", p},           {"alpha", o.alpha},         {"point", o.point},
            {"solver", o.solver},   {"grid_res", o.grid_res}, {"wos_paths", o.wos_paths}, {"wos_eps", o.wos_eps},
            {"beta_n", o.beta_n},   {"theta", o.theta}, {"seed", o.seed},           {"eps_list", o.eps_list},
            {"dim", o.dim},         {"paths", o.paths}};
}

std::optional<Point> parse_point(const Options& o, int n) {
    if (o.point.empty()) return std::nullopt;
    const auto v = parse_list(o.point, "point");
    if (static_cast<int>(v.size()) != n) throw ValidationError("--point has the wrong dimension");
    Point x(n);
    for (int i = 0; i < n; ++i) x[i] = v[static_cast<std::size_t>(i)];
    return x;
}

json certificates_payload(const std::vector<Certificate>& certs, const std::vector<double>& eps = {}) {
    json list = json::array();
    for (const auto& c : certs) list.push_back(c.to_json());
    return {{"certificates", list}, {"eps", eps}};
}

json compute(const Options& o, const std::optional<Domain>& domain) {
    const CertifyConfig cfg = certify_config(o);
    if (o.command == "torsion") {
        GridSolveConfig g;
        g.resolution = cfg.grid_resolution;
        const ScalarField field = grid_torsion(*domain, g);
        std::ostringstream csv;
        write_field_csv(csv, field);
        json summary = {{"max", field.max_value()},
                        {"volume", volume(*domain).value},
                        {"rigidity", torsional_rigidity(field)},
                        {"ball_max", ball_sup(domain->dim(), volume(*domain).value)}};
        if (auto x = parse_point(o, domain->dim())) summary["u_point"] = field.value_at(*x);
        return {{"summary", summary}, {"field_csv", csv.str()}};
    }
    if (o.command == "asymmetry") {
        json result = json::parse(fraenkel(*domain, cfg.asymmetry).to_json());
        return {{"asymmetry", result}};
    }
    if (o.command == "deficit") {
        json rows = json::array();
        if (auto x = parse_point(o, domain->dim())) {
            const DeficitEstimate d = deficit_point(*domain, *x, cfg);
            std::string where = o.point;
            std::replace(where.begin(), where.end(), ',', ';');
            rows.push_back({{"quantity", "point"}, {"param", where}, {"deficit", d.value}, {"sigma", d.sigma},
                            {"u", d.u},            {"u_ball", d.u_ball}});
            return {{"deficits", rows}};
        }
        const std::vector<double> ps = p_values(o, {std::numeric_limits<double>::infinity()});
        const std::vector<DeficitEstimate> ds = deficit_lp(*domain, ps, cfg);
        for (std::size_t i = 0; i < ps.size(); ++i)
            rows.push_back({{"quantity", "lp"},
                            {"param", std::isinf(ps[i]) ? "inf" : format_double(ps[i])},
                            {"deficit", ds[i].value},
                            {"sigma", ds[i].sigma},
                            {"u", ds[i].u},
                            {"u_ball", ds[i].u_ball}});
        return {{"deficits", rows}};
    }
    if (o.command == "certify") {
        std::vector<Certificate> certs;
        if (o.theorem.empty() || o.theorem == "1") {
            const Point x = parse_point(o, domain->dim()).value_or(Point::Zero(domain->dim()));
            certs.push_back(certify_thm1(*domain, x, cfg));
        } else if (o.theorem == "2") {
            const TorsionAnalysis an = analyze(*domain, cfg);
            for (double p : p_values(o, {1.0})) certs.push_back(certify_thm2(an, p, cfg));
        } else if (o.theorem == "3" || o.theorem == "psz") {
            const std::vector<double> alphas = o.alpha.empty() ? std::vector<double>{1.0} : o.alpha;
            for (double a : alphas) {
                CertifyConfig c = cfg;
                c.fractional.alpha = a;
                certs.push_back(o.theorem == "3" ? certify_thm3(*domain, c) : check_psz(*domain, c));
            }
        } else {
            throw ValidationError("--theorem must be one of 1, 2, 3, psz");
        }
        return certificates_payload(certs);
    }
    if (o.command == "sweep") {
        SweepRequest req;
        req.eps = parse_list(o.eps_list, "eps");
        if (!o.theorem.empty()) req.theorems = split(o.theorem, ',');
        req.ps = p_values(o, req.ps);
        if (!o.alpha.empty()) req.alphas = o.alpha;
        return certificates_payload(sweep(req, cfg), req.eps);
    }
    if (o.command == "calibrate") {
        const double alpha = o.alpha.empty() ? 1.0 : o.alpha.front();
        StablePathConfig sc = cfg.calibration;
        sc.seed = cfg.seed;
        const Estimate e = calibrate_ball_amplitude(o.dim, alpha, sc);
        return {{"n", o.dim}, {"alpha", alpha}, {"amplitude", e.value}, {"sigma", e.std_error}, {"paths", e.samples}};
    }
    throw ValidationError("unknown command '" + o.command + "'");
}

void print_or_write_json(const json& doc, const Options& o) {
    if (o.out.empty())
        std::cout << doc.dump(2) << '\n';
    else
        write_json_report(doc, o.out);
}

void render(const json& payload, const Options& o) {
    const ReportFormat fmt = parse_report_format(o.format);
    if (fmt == ReportFormat::svg_data && o.out.empty()) throw ValidationError("--format svg-data requires --out");
    if (payload.contains("certificates")) {
        std::vector<Certificate> certs;
        for (const auto& c : payload["certificates"]) certs.push_back(certificate_from_json(c));
        const auto eps = payload["eps"].get<std::vector<double>>();
        if (!o.out.empty()) {
            write_certificates(certs, fmt, o.out, eps);
        } else if (fmt == ReportFormat::csv) {
            std::cout << certificate_csv_header() << '\n';
            for (const auto& c : certs) std::cout << certificate_csv_row(c) << '\n';
        } else {
            std::cout << (certs.size() == 1 ? payload["certificates"][0] : payload["certificates"]).dump(2) << '\n';
        }
        return;
    }
    if (payload.contains("field_csv")) {
        std::istringstream in(payload["field_csv"].get<std::string>());
        const ScalarField field = read_field_csv(in);
        if (o.out.empty()) {
            if (fmt == ReportFormat::csv)
                std::cout << payload["field_csv"].get<std::string>();
            else
                std::cout << payload["summary"].dump(2) << '\n';
            return;
        }
        write_field_report(field, distribution_function(field, 256), fmt, o.out);
        write_json_report(payload["summary"], std::filesystem::path(o.out).string() + ".summary");
        return;
    }
    if (fmt == ReportFormat::csv) {
        std::ostringstream csv;
        if (payload.contains("asymmetry")) {
            const json& a = payload["asymmetry"];
            csv << "A,evaluations,stagnated\n"
                << format_double(a["A"].get<double>()) << ',' << a["evaluations"] << ',' << a["stagnated"] << '\n';
        } else if (payload.contains("deficits")) {
            csv << "quantity,param,deficit,sigma\n";
            for (const auto& r : payload["deficits"])
                csv << r["quantity"].get<std::string>() << ',' << r["param"].get<std::string>() << ','
                    << format_double(r["deficit"].get<double>()) << ',' << format_double(r["sigma"].get<double>())
                    << '\n';
        } else {
            csv << "n,alpha,amplitude,sigma\n"
                << payload["n"] << ',' << format_double(payload["alpha"].get<double>()) << ','
                << format_double(payload["amplitude"].get<double>()) << ','
                << format_double(payload["sigma"].get<double>()) << '\n';
        }
        if (o.out.empty()) {
            std::cout << csv.str();
        } else {
            std::ofstream f(o.out + ".csv", std::ios::binary | std::ios::trunc);
            if (!(f << csv.str())) throw ValidationError("cannot write " + o.out + ".csv");
        }
        return;
    }
    if (fmt == ReportFormat::svg_data) {
        if (!payload.contains("asymmetry")) throw ValidationError("svg-data is not available for this command");
        std::vector<double> x, y;
        for (const auto& s : payload["asymmetry"]["trace"]) {
            x.push_back(static_cast<double>(x.size()));
            y.push_back(s["value"].get<double>());
        }
        std::ofstream f(o.out + ".trace.dat", std::ios::binary | std::ios::trunc);
        write_polyline(f, x, y);
        if (!f) throw ValidationError("cannot write " + o.out + ".trace.dat");
        return;
    }
    print_or_write_json(payload, o);
}

int run(const Options& o) {
    if (o.threads < 0) throw ValidationError("--threads must be non-negative");
    if (o.threads > 0) set_thread_count(o.threads);
    (void)parse_report_format(o.format);

    const bool needs_domain = o.command != "sweep" && o.command != "calibrate";
    std::optional<Domain> domain;
    if (needs_domain) domain = load_domain(o);

    std::string dir = o.cache_dir;
    if (const char* env = std::getenv("TORSIONLAB_CACHE"); env && *env) dir = env;
    const bool use_cache = !o.no_cache && !dir.empty();

    const json inputs = cache_inputs(o.command, domain ? domain_to_json(*domain) : json(nullptr), run_config(o),
                                     TORSIONLAB_VERSION);
    std::optional<ResultCache> cache;
    std::optional<CacheLock> lock;
    std::optional<json> payload;
    if (use_cache) {
        cache.emplace(dir);
        lock.emplace(cache->dir());
        std::vector<std::string> warnings;
        payload = cache->lookup(cache_key(inputs), &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    }
    if (!payload) {
        payload = compute(o, domain);
        if (cache) cache->store(inputs, *payload);
    }
    render(*payload, o);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Expected lifetimes of Brownian and stable processes, asymmetry and deficit certificates"};
    app.set_version_flag("--version", std::string(TORSIONLAB_VERSION));
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--domain", o.domain_path, "Domain spec (JSON file)");
    app.add_option("--theorem", o.theorem, "1, 2, 3 or psz (sweep accepts a comma list)");
    app.add_option("--p", o.p, "Exponent p >= 1 or inf (repeatable, comma lists allowed)");
    app.add_option("--alpha", o.alpha, "Stable order in (0, 2]");
    app.add_option("--point", o.point, "Evaluation point X,Y[,Z]");
    app.add_option("--solver", o.solver, "grid, wos or closed-form");
    app.add_option("--grid-res", o.grid_res, "Cells along the longest axis");
    app.add_option("--wos-paths", o.wos_paths, "Walk-on-spheres paths");
    app.add_option("--wos-eps", o.wos_eps, "Walk-on-spheres boundary shell (0 = automatic)");
    app.add_option("--beta-n", o.beta_n, "Quantitative isoperimetric constant");
    app.add_option("--theta", o.theta, "Level fraction for t*");
    app.add_option("--seed", o.seed, "Random seed");
    app.add_option("--cache-dir", o.cache_dir, "Result cache directory (TORSIONLAB_CACHE overrides)");
    app.add_flag("--no-cache", o.no_cache, "Bypass the result cache");
    app.add_option("--out", o.out, "Output file stem");
    app.add_option("--format", o.format, "csv, json or svg-data");
    app.add_option("--eps-list", o.eps_list, "Ellipse parameters for sweep");
    app.add_option("--threads", o.threads, "Worker threads (0 = hardware)");
    app.add_option("--dim", o.dim, "Dimension for calibrate");
    app.add_option("--paths", o.paths, "Path count for calibrate");

    const std::pair<const char*, const char*> commands[] = {
        {"torsion", "Expected lifetime field or point value"},
        {"asymmetry", "Fraenkel asymmetry and its search trace"},
        {"deficit", "Torsion deficits at a point or in Lp"},
        {"certify", "Check one inequality on one domain"},
        {"sweep", "Certificates over the ellipse family"},
        {"calibrate", "Stable ball amplitude by path simulation"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->callback([&o, name] { o.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return run(o);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 3;
    }
}
