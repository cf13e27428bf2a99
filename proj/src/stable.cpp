#include "torsionlab/stable.hpp"

#include "torsionlab/errors.hpp"
#include "torsionlab/parallel.hpp"
#include "torsionlab/random.hpp"
#include "torsionlab/special.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace torsionlab {

namespace {

void require_order(double alpha, bool allow_two, const char* op) {
    const bool ok = alpha > 0.0 && (allow_two ? alpha <= 2.0 : alpha < 2.0);
    if (!ok) throw ValidationError(std::string(op) + ": alpha must lie in (0, " + (allow_two ? "2]" : "2)"));
}

Estimate summarize(const std::vector<double>& samples) {
    Estimate est;
    est.samples = samples.size();
    if (samples.empty()) return est;
    double sum = 0.0;
    for (double s : samples) sum += s;
    const double mean = sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    est.value = mean;
    if (samples.size() > 1)
        est.std_error = std::sqrt(ss / static_cast<double>(samples.size() - 1) / static_cast<double>(samples.size()));
    return est;
}

constexpr double kLogEtaMin = -32.0;  // η ≈ 1.3e-14
constexpr double kLogEtaMax = 32.0;   // η ≈ 7.9e13
constexpr double kMaxOvershoot = 1e15;

}  // namespace

double fractional_laplacian_constant(int n, double alpha) {
    if (n < 1) throw ValidationError("fractional_laplacian_constant: dimension must be positive");
    require_order(alpha, false, "fractional_laplacian_constant");
    // |Γ(−α/2)| = π / (sin(πα/2) Γ(1 + α/2)) by reflection.
    const double log_abs_gamma = std::log(std::numbers::pi) - std::log(std::sin(0.5 * std::numbers::pi * alpha)) -
                                 std::lgamma(1.0 + 0.5 * alpha);
    return std::exp(alpha * std::log(2.0) + std::lgamma(0.5 * (n + alpha)) - 0.5 * n * std::log(std::numbers::pi) -
                    log_abs_gamma);
}

OvershootTable::OvershootTable(double alpha, int nodes) : alpha_(alpha) {
    require_order(alpha, false, "overshoot table");
    if (nodes < 16) throw ValidationError("overshoot table: at least 16 nodes required");
    const double a = 0.5 * alpha;
    const double b = 1.0 - a;
    log_eta_.resize(static_cast<std::size_t>(nodes));
    logit_.resize(static_cast<std::size_t>(nodes));
    for (int j = 0; j < nodes; ++j) {
        const double le = kLogEtaMin + (kLogEtaMax - kLogEtaMin) * j / (nodes - 1);
        const double eta = std::exp(le);
        // P(ρ ≤ 1 + η) = I_w(1 − α/2, α/2) with w = 1 − 1/ρ²; the complement is
        // evaluated on its own so both tails keep their relative accuracy.
        const double inv_rho2 = 1.0 / ((1.0 + eta) * (1.0 + eta));
        const double w = eta * (2.0 + eta) * inv_rho2;
        const double F = regularized_beta(w, b, a);
        const double G = regularized_beta(inv_rho2, a, b);
        log_eta_[static_cast<std::size_t>(j)] = le;
        logit_[static_cast<std::size_t>(j)] = std::log(F) - std::log(G);
    }
    for (std::size_t j = 1; j < logit_.size(); ++j)
        if (!(logit_[j] > logit_[j - 1])) throw SolverError("overshoot table: CDF is not increasing; inverse transform unconverged");
}

double OvershootTable::sample(double u) const {
    const double L = std::log(u) - std::log1p(-u);
    double le;
    if (L <= logit_.front()) {
        // F ~ c η^{1 − α/2} as η → 0.
        le = log_eta_.front() + (L - logit_.front()) / (1.0 - 0.5 * alpha_);
    } else if (L >= logit_.back()) {
        // 1 − F ~ c η^{−α} as η → ∞.
        le = log_eta_.back() + (L - logit_.back()) / alpha_;
    } else {
        const auto it = std::upper_bound(logit_.begin(), logit_.end(), L);
        const std::size_t j = static_cast<std::size_t>(it - logit_.begin());
        const double s = (L - logit_[j - 1]) / (logit_[j] - logit_[j - 1]);
        le = log_eta_[j - 1] + s * (log_eta_[j] - log_eta_[j - 1]);
    }
    return std::min(1.0 + std::exp(le), kMaxOvershoot);
}

double OvershootTable::cdf(double rho) const {
    if (rho <= 1.0) return 0.0;
    const double inv_rho2 = 1.0 / (rho * rho);
    return regularized_beta(1.0 - inv_rho2, 1.0 - 0.5 * alpha_, 0.5 * alpha_);
}

std::string OvershootTable::to_json() const {
    nlohmann::json j;
    j["alpha"] = alpha_;
    j["nodes"] = nodes();
    j["log_eta"] = log_eta_;
    j["logit"] = logit_;
    return j.dump();
}

OvershootTable OvershootTable::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("overshoot table: ") + e.what());
    }
    OvershootTable t;
    try {
        t.alpha_ = j.at("alpha").get<double>();
        t.log_eta_ = j.at("log_eta").get<std::vector<double>>();
        t.logit_ = j.at("logit").get<std::vector<double>>();
        if (j.at("nodes").get<int>() != static_cast<int>(t.log_eta_.size()))
            throw ParseError("overshoot table: nodes does not match table length");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("overshoot table: ") + e.what());
    }
    require_order(t.alpha_, false, "overshoot table");
    if (t.log_eta_.size() != t.logit_.size() || t.log_eta_.size() < 16)
        throw ParseError("overshoot table: malformed node arrays");
    return t;
}

std::shared_ptr<const OvershootTable> overshoot_table(double alpha, int nodes) {
    static std::mutex mutex;
    static std::map<std::pair<double, int>, std::shared_ptr<const OvershootTable>> tables;
    std::lock_guard lock(mutex);
    auto& slot = tables[{alpha, nodes}];
    if (!slot) slot = std::make_shared<const OvershootTable>(alpha, nodes);
    return slot;
}

double stable_ball_lifetime(const FractionalConfig& cfg, double R, const Point& x, int n) {
    require_order(cfg.alpha, true, "stable_ball_lifetime");
    if (!(cfg.ball_amplitude > 0.0)) throw ValidationError("stable_ball_lifetime: ball amplitude must be positive");
    if (!(R > 0.0)) throw ValidationError("stable_ball_lifetime: radius must be positive");
    if (x.size() != n) throw ValidationError("stable_ball_lifetime: point dimension must equal n");
    const double r2 = x.squaredNorm();
    if (r2 > R * R * (1.0 + 1e-12)) throw ValidationError("stable_ball_lifetime: |x| exceeds the radius");
    return cfg.ball_amplitude * std::pow(std::max(0.0, R * R - r2), 0.5 * cfg.alpha);
}

double stable_ball_rigidity(const FractionalConfig& cfg, int n, double volume) {
    require_order(cfg.alpha, true, "stable_ball_rigidity");
    if (!(cfg.ball_amplitude > 0.0)) throw ValidationError("stable_ball_rigidity: ball amplitude must be positive");
    const double R = equivalent_ball_radius(volume, n);
    return cfg.ball_amplitude * 0.5 * n * unit_ball_volume(n) * std::pow(R, n + cfg.alpha) *
           beta_function(0.5 * n, 1.0 + 0.5 * cfg.alpha);
}

double positive_stable_variate(double beta, double u, double w) {
    // u uniform on (0, π), w standard exponential.
    const double a = std::sin(beta * u) / std::pow(std::sin(u), 1.0 / beta);
    const double c = std::pow(std::sin((1.0 - beta) * u) / w, (1.0 - beta) / beta);
    return a * c;
}

namespace {

double simulate_stable_exit(const Domain& domain, const Point& x0, double alpha, const StablePathConfig& cfg,
                            double floor_distance, double min_dt, RandomStream& rng, bool& exhausted) {
    const int n = domain.dim();
    const double beta = 0.5 * alpha;
    Point x = x0;
    Point y(n);
    double t = 0.0;
    for (int step = 0; step < cfg.max_steps; ++step) {
        const double d = std::max(boundary_distance(domain, x), floor_distance);
        const double dt = alpha == 2.0 ? std::max(std::pow(cfg.brownian_step_fraction * d, 2.0), min_dt)
                                       : cfg.exit_miss * std::pow(d, alpha);
        double scale;
        if (alpha == 2.0) {
            scale = std::sqrt(2.0 * dt);
        } else {
            const double A = positive_stable_variate(beta, std::numbers::pi * rng.uniform_open(), rng.exponential());
            scale = std::sqrt(2.0 * std::pow(dt, 1.0 / beta) * A);
        }
        for (int i = 0; i < n; ++i) y[i] = x[i] + scale * rng.gaussian();
        if (!contains(domain, y)) {
            if (alpha == 2.0) {
                double lo = 0.0, hi = 1.0;
                for (int it = 0; it < 20; ++it) {
                    const double m = 0.5 * (lo + hi);
                    if (contains(domain, Point(x + m * (y - x))))
                        lo = m;
                    else
                        hi = m;
                }
                return t + 0.5 * (lo + hi) * dt;
            }
            return t + dt;
        }
        if (alpha == 2.0) {
            const double d2 = boundary_distance(domain, y);
            if (rng.uniform() < std::exp(-d * d2 / dt)) return t + 0.5 * dt;
        }
        x.swap(y);
        t += dt;
    }
    exhausted = true;
    return t;
}

}  // namespace

Estimate stable_path_lifetime(const Domain& domain, const Point& x, double alpha, const StablePathConfig& cfg) {
    require_order(alpha, true, "stable_path_lifetime");
    if (x.size() != domain.dim()) throw ValidationError("stable_path_lifetime: point dimension mismatch");
    if (!(cfg.exit_miss > 0.0 && cfg.exit_miss < 1.0))
        throw ValidationError("stable_path_lifetime: exit_miss must lie in (0, 1)");
    if (!(cfg.brownian_step_fraction > 0.0 && cfg.brownian_step_fraction < 1.0))
        throw ValidationError("stable_path_lifetime: brownian_step_fraction must lie in (0, 1)");
    if (cfg.paths < 1) throw ValidationError("stable_path_lifetime: paths must be at least 1");
    if (!contains(domain, x)) throw ValidationError("stable_path_lifetime: starting point is outside the domain");
    const double scale = length_scale(domain);
    const double floor_distance = 1e-9 * scale;
    const double min_dt = cfg.brownian_min_step * scale * scale;
    std::vector<double> times(cfg.paths);
    std::vector<std::uint8_t> stuck(cfg.paths, 0);
    parallel_for(cfg.paths, [&](std::size_t k) {
        RandomStream rng(cfg.seed, k);
        bool exhausted = false;
        times[k] = simulate_stable_exit(domain, x, alpha, cfg, floor_distance, min_dt, rng, exhausted);
        stuck[k] = exhausted ? 1 : 0;
    });
    Estimate est = summarize(times);
    std::size_t count = 0;
    for (auto s : stuck) count += s;
    if (count > 0)
        est.warnings.push_back("simulation budget exceeded on " + std::to_string(count) + " paths");
    return est;
}

Estimate calibrate_ball_amplitude(int n, double alpha, const StablePathConfig& cfg) {
    if (n < 1) throw ValidationError("calibrate_ball_amplitude: dimension must be positive");
    const Domain ball = Domain::ball(Point::Zero(n), 1.0);
    Estimate est = stable_path_lifetime(ball, Point::Zero(n), alpha, cfg);
    if (!est.warnings.empty()) throw SolverError("calibrate_ball_amplitude: " + est.warnings.front());
    return est;
}

namespace {

/// One stable walk-on-spheres path; returns Σ C r_k^α.
double stable_walk(const Domain& domain, const Point& x0, double alpha, double amplitude, const OvershootTable& table,
                   int max_steps, RandomStream& rng, bool& exhausted) {
    const int n = domain.dim();
    Point x = x0;
    double acc = 0.0;
    for (int step = 0; step < max_steps; ++step) {
        const double r = boundary_distance(domain, x);
        acc += amplitude * std::pow(r, alpha);
        const double rho = table.sample(rng.uniform_open());
        x += (r * rho) * rng.direction(n);
        if (!contains(domain, x)) return acc;
    }
    exhausted = true;
    return acc;
}

double brownian_walk(const Domain& domain, const Point& x0, double amplitude, double eps, int max_steps,
                     RandomStream& rng, bool& exhausted) {
    const int n = domain.dim();
    Point x = x0;
    double acc = 0.0;
    for (int step = 0; step < max_steps; ++step) {
        const double r = boundary_distance(domain, x);
        if (r < eps) return acc;
        acc += amplitude * r * r;
        x += r * rng.direction(n);
        if (!contains(domain, x)) return acc;
    }
    exhausted = true;
    return acc;
}

void require_fractional(const FractionalConfig& cfg, const char* op) {
    require_order(cfg.alpha, true, op);
    if (!(cfg.ball_amplitude > 0.0))
        throw ValidationError(std::string(op) + ": ball amplitude must be supplied or calibrated first");
    if (cfg.paths < 1) throw ValidationError(std::string(op) + ": paths must be at least 1");
    if (cfg.max_steps < 1) throw ValidationError(std::string(op) + ": max_steps must be at least 1");
}

}  // namespace

Estimate stable_wos_lifetime(const Domain& domain, const Point& x, const FractionalConfig& cfg) {
    require_fractional(cfg, "stable_wos_lifetime");
    if (x.size() != domain.dim()) throw ValidationError("stable_wos_lifetime: point dimension mismatch");
    if (!contains(domain, x)) throw ValidationError("stable_wos_lifetime: starting point is outside the domain");
    const double eps = 1e-4 * length_scale(domain);
    std::shared_ptr<const OvershootTable> table;
    if (cfg.alpha < 2.0) table = overshoot_table(cfg.alpha, cfg.overshoot_nodes);
    std::vector<double> values(cfg.paths);
    std::vector<std::uint8_t> stuck(cfg.paths, 0);
    parallel_for(cfg.paths, [&](std::size_t k) {
        RandomStream rng(cfg.seed, k);
        bool exhausted = false;
        values[k] = table ? stable_walk(domain, x, cfg.alpha, cfg.ball_amplitude, *table, cfg.max_steps, rng, exhausted)
                          : brownian_walk(domain, x, cfg.ball_amplitude, eps, cfg.max_steps, rng, exhausted);
        stuck[k] = exhausted ? 1 : 0;
    });
    Estimate est = summarize(values);
    std::size_t count = 0;
    for (auto s : stuck) count += s;
    if (count * 100 > cfg.paths)
        est.warnings.push_back("max_steps exhausted on " + std::to_string(count) + " walks");
    return est;
}

Estimate fractional_rigidity(const Domain& domain, const FractionalConfig& cfg, const RigidityConfig& sampling) {
    require_fractional(cfg, "fractional_rigidity");
    if (sampling.resolution < 1) throw ValidationError("fractional_rigidity: empty sample set");
    if (sampling.samples_per_cell < 2) throw ValidationError("fractional_rigidity: at least two samples per cell");
    const GridSpec grid = grid_for(domain, sampling.resolution);
    const std::size_t cells = grid.cell_count();
    const int m = sampling.samples_per_cell;
    const int n = domain.dim();
    const double eps = 1e-4 * length_scale(domain);
    std::shared_ptr<const OvershootTable> table;
    if (cfg.alpha < 2.0) table = overshoot_table(cfg.alpha, cfg.overshoot_nodes);

    std::vector<double> mean(cells, 0.0), var(cells, 0.0);
    std::vector<std::uint8_t> stuck(cells, 0);
    parallel_for(cells, [&](std::size_t c) {
        const Point corner = grid.center(c) - Point::Constant(n, 0.5 * grid.h);
        std::vector<double> vals(static_cast<std::size_t>(m), 0.0);
        for (int j = 0; j < m; ++j) {
            RandomStream rng(cfg.seed, c * static_cast<std::size_t>(m) + static_cast<std::size_t>(j));
            Point y(n);
            for (int i = 0; i < n; ++i) y[i] = corner[i] + grid.h * rng.uniform();
            if (!contains(domain, y)) continue;
            bool exhausted = false;
            vals[static_cast<std::size_t>(j)] =
                table ? stable_walk(domain, y, cfg.alpha, cfg.ball_amplitude, *table, cfg.max_steps, rng, exhausted)
                      : brownian_walk(domain, y, cfg.ball_amplitude, eps, cfg.max_steps, rng, exhausted);
            if (exhausted) stuck[c] = 1;
        }
        double s = 0.0;
        for (double v : vals) s += v;
        const double mu = s / m;
        double ss = 0.0;
        for (double v : vals) ss += (v - mu) * (v - mu);
        mean[c] = mu;
        var[c] = ss / (m - 1) / m;
    });
    const double hv = grid.cell_volume();
    Estimate est;
    double total = 0.0, total_var = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < cells; ++c) {
        total += mean[c];
        total_var += var[c];
        count += stuck[c];
    }
    est.value = hv * total;
    est.std_error = hv * std::sqrt(total_var);
    est.samples = cells * static_cast<std::size_t>(m);
    if (count > 0) est.warnings.push_back("max_steps exhausted in " + std::to_string(count) + " cells");
    return est;
}

namespace {

struct SeminormWork {
    SeminormResult result;
    std::vector<double> slice_levels;
    std::vector<double> slice_perimeters;
};

/// Shared double sum for seminorms and, when slices > 0, for the perimeters
/// of the super-level sets {u > t_m} at slice midpoints.
SeminormWork seminorm_work(const ScalarField& field, double alpha, double p, double cutoff, int slices) {
    require_order(alpha, false, "fractional_seminorm");
    if (!(p >= 1.0)) throw ValidationError("fractional_seminorm: p must be at least 1");
    if (!field.values.allFinite()) throw ValidationError("fractional_seminorm: field is not finite");
    for (std::size_t i = 0; i < field.size(); ++i)
        if (!field.mask[i] && field.values[static_cast<Eigen::Index>(i)] != 0.0)
            throw ValidationError("fractional_seminorm: field does not vanish outside its mask");
    const GridSpec& g = field.grid;
    const int n = g.dim();
    const double h = g.h;
    const double s = 0.5 * alpha * p;
    if (!(s < p)) throw ValidationError("fractional_seminorm: kernel exponent too large");

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < field.size(); ++i)
        if (field.values[static_cast<Eigen::Index>(i)] != 0.0) support.push_back(i);

    SeminormWork work;
    SeminormResult& res = work.result;
    res.exponent = s;

    // Diameter of the support's cell hull.
    double diameter = 0.0;
    if (!support.empty()) {
        Eigen::VectorXi lo = g.multi_index(support.front()), hi = lo;
        for (std::size_t i : support) {
            const Eigen::VectorXi m = g.multi_index(i);
            lo = lo.cwiseMin(m);
            hi = hi.cwiseMax(m);
        }
        diameter = h * ((hi - lo).cast<double>().array() + 1.0).matrix().norm();
    } else {
        Eigen::VectorXd ext = g.extents.cast<double>();
        diameter = h * ext.norm();
    }
    const double L = cutoff > 0.0 ? cutoff : 2.0 * diameter;
    if (L < diameter) throw ValidationError("fractional_seminorm: cutoff smaller than the domain diameter");
    res.cutoff = L;

    const double max_value = support.empty() ? 0.0 : field.values.cwiseAbs().maxCoeff();
    const double dt = slices > 0 && max_value > 0.0 ? max_value / slices : 0.0;
    if (slices > 0) {
        work.slice_levels.resize(static_cast<std::size_t>(slices));
        work.slice_perimeters.assign(static_cast<std::size_t>(slices), 0.0);
        for (int k = 0; k < slices; ++k) work.slice_levels[static_cast<std::size_t>(k)] = (k + 0.5) * dt;
    }
    if (support.empty()) return work;

    // Kernel |kh|^{−n−s} on the offset lattice of the grid.
    Eigen::VectorXi span(n);
    std::vector<std::ptrdiff_t> tstride(static_cast<std::size_t>(n));
    std::size_t tsize = 1;
    for (int a = 0; a < n; ++a) {
        span[a] = 2 * g.extents[a] - 1;
        tstride[static_cast<std::size_t>(a)] = static_cast<std::ptrdiff_t>(tsize);
        tsize *= static_cast<std::size_t>(span[a]);
    }
    std::vector<double> kernel(tsize, 0.0);
    for (std::size_t t = 0; t < tsize; ++t) {
        std::size_t rem = t;
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) {
            const auto k = static_cast<double>(static_cast<int>(rem % static_cast<std::size_t>(span[a])) - (g.extents[a] - 1));
            rem /= static_cast<std::size_t>(span[a]);
            r2 += k * k;
        }
        if (r2 > 0.0) kernel[t] = std::pow(h * h * r2, -0.5 * (n + s));
    }
    std::vector<std::ptrdiff_t> base(support.size());
    for (std::size_t q = 0; q < support.size(); ++q) {
        const Eigen::VectorXi m = g.multi_index(support[q]);
        std::ptrdiff_t b = 0;
        for (int a = 0; a < n; ++a) b += (m[a] + g.extents[a] - 1) * tstride[static_cast<std::size_t>(a)];
        base[q] = b;
    }
    std::ptrdiff_t centre = 0;
    for (int a = 0; a < n; ++a) centre += (g.extents[a] - 1) * tstride[static_cast<std::size_t>(a)];

    // Lattice sum of the kernel over 0 < |k|h ≤ L, plus the analytic tail.
    const int reach = static_cast<int>(std::floor(L / h));
    double lattice = 0.0;
    {
        Eigen::VectorXi k = Eigen::VectorXi::Constant(n, -reach);
        const double L2 = (L / h) * (L / h);
        for (;;) {
            const double r2 = k.cast<double>().squaredNorm();
            if (r2 > 0.0 && r2 <= L2) lattice += std::pow(h * h * r2, -0.5 * (n + s));
            int a = 0;
            while (a < n && ++k[a] > reach) k[a++] = -reach;
            if (a == n) break;
        }
    }
    const double hv = g.cell_volume();
    const double tail = unit_sphere_area(n) * std::pow(L, -s) / s;

    auto power = [p](double v) { return p == 1.0 ? v : (p == 2.0 ? v * v : std::pow(v, p)); };
    const std::size_t S = support.size();
    std::vector<double> pair_part(S, 0.0), outside_part(S, 0.0), tail_part(S, 0.0);
    std::vector<std::vector<double>> slice_diff(slices > 0 ? S : 0);
    parallel_for(S, [&](std::size_t q) {
        const double ui = field.values[static_cast<Eigen::Index>(support[q])];
        double pairs = 0.0, in_support = 0.0;
        std::vector<double>* diff = nullptr;
        if (slices > 0) {
            slice_diff[q].assign(static_cast<std::size_t>(slices) + 1, 0.0);
            diff = &slice_diff[q];
        }
        const std::ptrdiff_t off = centre - base[q];
        for (std::size_t r = 0; r < S; ++r) {
            if (r == q) continue;
            const double k = kernel[static_cast<std::size_t>(base[r] + off)];
            in_support += k;
            if (r < q) continue;
            const double uj = field.values[static_cast<Eigen::Index>(support[r])];
            pairs += power(std::abs(ui - uj)) * k;
            if (diff) {
                const double lo = std::min(ui, uj), hi = std::max(ui, uj);
                const int m0 = std::clamp(static_cast<int>(std::ceil(lo / dt - 0.5)), 0, slices);
                const int m1 = std::clamp(static_cast<int>(std::ceil(hi / dt - 0.5)), 0, slices);
                (*diff)[static_cast<std::size_t>(m0)] += hv * hv * k;
                (*diff)[static_cast<std::size_t>(m1)] -= hv * hv * k;
            }
        }
        pair_part[q] = 2.0 * hv * hv * pairs;
        // Partners with u = 0: lattice points within the cutoff outside the support.
        const double w_out = hv * hv * (lattice - in_support);
        outside_part[q] = 2.0 * power(std::abs(ui)) * w_out;
        tail_part[q] = 2.0 * power(std::abs(ui)) * hv * tail;
        if (diff) {
            const int m1 = std::clamp(static_cast<int>(std::ceil(std::abs(ui) / dt - 0.5)), 0, slices);
            (*diff)[0] += w_out + hv * tail;
            (*diff)[static_cast<std::size_t>(m1)] -= w_out + hv * tail;
        }
    });
    for (std::size_t q = 0; q < S; ++q) {
        res.interior += pair_part[q];
        res.exterior += outside_part[q];
        res.tail += tail_part[q];
    }

    // Diagonal cells: the ball of volume h^n about each centre, with
    // |u(x) − u(y)| ≈ |∇u(x)·(x − y)|.
    const double rho_c = equivalent_ball_radius(hv, n);
    const double shell_factor = sphere_abs_moment(n, p) * std::pow(rho_c, p - s) / (p - s);
    double shell = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const Eigen::VectorXi m = g.multi_index(i);
        double grad2 = 0.0;
        for (int a = 0; a < n; ++a) {
            const auto st = static_cast<Eigen::Index>(g.stride(a));
            const auto ii = static_cast<Eigen::Index>(i);
            const double up = m[a] + 1 < g.extents[a] ? field.values[ii + st] : 0.0;
            const double dn = m[a] > 0 ? field.values[ii - st] : 0.0;
            grad2 += (up - dn) * (up - dn) / (4.0 * h * h);
        }
        if (grad2 > 0.0) shell += hv * power(std::sqrt(grad2)) * shell_factor;
    }
    res.shell = shell;
    res.integral = res.interior + res.exterior + res.tail + res.shell;
    res.value = std::pow(res.integral, 1.0 / p);

    if (slices > 0) {
        std::vector<double> acc(static_cast<std::size_t>(slices) + 1, 0.0);
        for (std::size_t q = 0; q < S; ++q)
            for (std::size_t m = 0; m <= static_cast<std::size_t>(slices); ++m) acc[m] += slice_diff[q][m];
        double running = 0.0;
        for (int m = 0; m < slices; ++m) {
            running += acc[static_cast<std::size_t>(m)];
            // Each unordered pair counted once is ½[χ]_{α,1} = P_α.
            work.slice_perimeters[static_cast<std::size_t>(m)] = running;
        }
    }
    return work;
}

}  // namespace

SeminormResult fractional_seminorm(const ScalarField& field, double alpha, double p, double cutoff) {
    return seminorm_work(field, alpha, p, cutoff, 0).result;
}

double fractional_perimeter(const Domain& domain, double alpha, int resolution, double cutoff) {
    const GridSpec grid = grid_for(domain, resolution);
    const ScalarField indicator = sample_field(domain, grid, [](const Point&) { return 1.0; });
    return 0.5 * fractional_seminorm(indicator, alpha, 1.0, cutoff).value;
}

CoareaResult fractional_coarea(const ScalarField& field, double alpha, int slices, double cutoff) {
    if (slices < 2) throw ValidationError("fractional_coarea: at least two slices required");
    SeminormWork work = seminorm_work(field, alpha, 1.0, cutoff, slices);
    CoareaResult out;
    out.seminorm = work.result.value;
    out.levels = std::move(work.slice_levels);
    out.perimeters = std::move(work.slice_perimeters);
    const double dt = out.levels.size() > 1 ? out.levels[1] - out.levels[0] : 0.0;
    for (double P : out.perimeters) out.layered += 2.0 * P * dt;
    return out;
}

double fractional_energy_bound(const ScalarField& test, double alpha, double normalization) {
    const int n = test.dim();
    const double A = normalization > 0.0 ? normalization : fractional_laplacian_constant(n, alpha);
    const double semi = fractional_seminorm(test, alpha, 2.0).integral;
    return 2.0 * test.grid.cell_volume() * test.values.sum() - 0.5 * A * semi;
}

}  // namespace torsionlab
