#include "torsionlab/brownian.hpp"

#include "torsionlab/errors.hpp"
#include "torsionlab/parallel.hpp"
#include "torsionlab/random.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <string>

namespace torsionlab {

namespace {

void require_point(const Domain& domain, const Point& x, const char* op) {
    if (x.size() != domain.dim())
        throw ValidationError(std::string(op) + ": point dimension " + std::to_string(x.size()) +
                              " does not match domain dimension " + std::to_string(domain.dim()));
    if (!x.allFinite()) throw ValidationError(std::string(op) + ": non-finite point");
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
    if (samples.size() > 1) est.std_error = std::sqrt(ss / static_cast<double>(samples.size() - 1) / static_cast<double>(samples.size()));
    return est;
}

/// Fraction s ∈ (0, 1] along [a, b] where the segment first leaves the
/// domain, located by bisection; a inside, b outside.
double crossing_fraction(const Domain& domain, const Point& a, const Point& b, int iterations) {
    double lo = 0.0, hi = 1.0;
    Point mid(a.size());
    for (int it = 0; it < iterations; ++it) {
        const double m = 0.5 * (lo + hi);
        mid = a + m * (b - a);
        if (contains(domain, mid))
            lo = m;
        else
            hi = m;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double ball_lifetime(double R, const Point& x, int n) {
    if (!(R > 0.0)) throw ValidationError("ball_lifetime: radius must be positive");
    if (n < 1 || x.size() != n) throw ValidationError("ball_lifetime: point dimension must equal n");
    const double r = x.norm();
    if (r > R * (1.0 + 1e-12)) throw ValidationError("ball_lifetime: |x| exceeds the radius");
    return std::max(0.0, ball_lifetime_radial(R, r, n));
}

double ball_second_moment(double R, const Point& x, int n) {
    if (!(R > 0.0)) throw ValidationError("ball_second_moment: radius must be positive");
    if (n < 1 || x.size() != n) throw ValidationError("ball_second_moment: point dimension must equal n");
    const double r2 = x.squaredNorm();
    const double R2 = R * R;
    if (r2 > R2 * (1.0 + 1e-12)) throw ValidationError("ball_second_moment: |x| exceeds the radius");
    const double nn = n;
    const double v = R2 * (R2 - r2) / (2.0 * nn * nn) - (R2 * R2 - r2 * r2) / (4.0 * nn * (nn + 2.0));
    return std::max(0.0, v);
}

double ellipse_lifetime(double eps, const Eigen::Vector2d& x) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ValidationError("ellipse_lifetime: eps must be non-negative");
    return ellipse_torsion(1.0, 1.0 + eps, x[0], x[1]);
}

std::optional<double> closed_form_lifetime(const Domain& domain, const Point& x) {
    require_point(domain, x, "closed_form_lifetime");
    switch (domain.kind()) {
        case DomainKind::ball: {
            const auto& b = domain.as<BallShape>();
            const Point y = x - b.center;
            if (y.norm() >= b.radius) return 0.0;
            return ball_lifetime(b.radius, y, domain.dim());
        }
        case DomainKind::ellipse: {
            const auto& e = domain.as<EllipseShape>();
            const Eigen::Vector2d y = Eigen::Vector2d(x[0], x[1]) - e.center;
            return ellipse_torsion(e.semi_x, e.semi_y, y[0], y[1]);
        }
        default:
            return std::nullopt;
    }
}

Estimate wos_lifetime(const Domain& domain, const Point& x, const WosConfig& cfg) {
    require_point(domain, x, "wos_lifetime");
    if (cfg.paths < 1) throw ValidationError("wos_lifetime: paths must be at least 1");
    if (cfg.max_steps < 1) throw ValidationError("wos_lifetime: max_steps must be at least 1");
    if (cfg.boundary_eps < 0.0) throw ValidationError("wos_lifetime: boundary_eps must be positive");
    if (!contains(domain, x)) throw ValidationError("wos_lifetime: starting point is outside the domain");
    const double eps = cfg.boundary_eps > 0.0 ? cfg.boundary_eps : 1e-4 * length_scale(domain);
    const int n = domain.dim();
    const double inv_2n = 1.0 / (2.0 * n);

    std::vector<double> values(cfg.paths);
    std::vector<std::uint8_t> exhausted(cfg.paths, 0);
    parallel_for(cfg.paths, [&](std::size_t k) {
        RandomStream rng(cfg.seed, k);
        const int walks = cfg.antithetic ? 2 : 1;
        std::vector<Point> pos(walks, x);
        std::vector<double> acc(walks, 0.0);
        std::vector<bool> done(walks, false);
        int steps = 0;
        while (steps < cfg.max_steps) {
            bool all_done = true;
            const Point dir = rng.direction(n);
            for (int w = 0; w < walks; ++w) {
                if (done[w]) continue;
                const double r = boundary_distance(domain, pos[w]);
                if (r < eps) {
                    done[w] = true;
                    continue;
                }
                all_done = false;
                acc[w] += r * r * inv_2n;
                pos[w] += (w == 0 ? r : -r) * dir;
                // Rounding can land the walker a hair outside; pull it back in.
                if (!contains(domain, pos[w])) done[w] = true;
            }
            if (all_done) break;
            ++steps;
        }
        if (steps >= cfg.max_steps) exhausted[k] = 1;
        values[k] = walks == 1 ? acc[0] : 0.5 * (acc[0] + acc[1]);
    });

    Estimate est = summarize(values);
    std::size_t stuck = 0;
    for (auto e : exhausted) stuck += e;
    if (stuck * 100 > cfg.paths)
        est.warnings.push_back("max_steps exhausted on " + std::to_string(stuck) + " of " +
                               std::to_string(cfg.paths) + " walks");
    return est;
}

ScalarField solve_dirichlet_poisson(const Domain& domain, const GridSpec& grid, const Eigen::VectorXd& rhs,
                                    const GridSolveConfig& cfg) {
    if (grid.dim() != domain.dim()) throw ValidationError("grid dimension does not match domain");
    const std::size_t cells = grid.cell_count();
    if (static_cast<std::size_t>(rhs.size()) != cells) throw ValidationError("right-hand side size does not match grid");
    const int n = grid.dim();

    ScalarField field;
    field.grid = grid;
    field.mask = domain_mask(domain, grid);
    field.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells));

    std::vector<std::ptrdiff_t> unknown(cells, -1);
    std::vector<std::size_t> cell_of;
    for (std::size_t i = 0; i < cells; ++i) {
        if (field.mask[i]) {
            unknown[i] = static_cast<std::ptrdiff_t>(cell_of.size());
            cell_of.push_back(i);
        }
    }
    const auto m = static_cast<Eigen::Index>(cell_of.size());
    if (m == 0) throw SolverError("grid solve: no grid cell lies inside the domain");

    // Scaled by h²: diagonal 2n (or larger at cut faces), off-diagonal −1.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m) * (2 * n + 1));
    Eigen::VectorXd b(m);
    const double h2 = grid.h * grid.h;
    for (Eigen::Index row = 0; row < m; ++row) {
        const std::size_t cell = cell_of[static_cast<std::size_t>(row)];
        const Eigen::VectorXi idx = grid.multi_index(cell);
        double diag = 0.0;
        for (int axis = 0; axis < n; ++axis) {
            for (int side = -1; side <= 1; side += 2) {
                const int k = idx[axis] + side;
                const bool in_grid = k >= 0 && k < grid.extents[axis];
                const std::size_t nb = in_grid ? static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cell) + side * grid.stride(axis)) : 0;
                if (in_grid && unknown[nb] >= 0) {
                    diag += 1.0;
                    triplets.emplace_back(row, unknown[nb], -1.0);
                    continue;
                }
                double theta = 1.0;
                if (cfg.boundary == BoundaryTreatment::linear_ghost && in_grid) {
                    theta = std::max(1e-3, crossing_fraction(domain, grid.center(cell), grid.center(nb), 40));
                }
                diag += 1.0 / theta;
            }
        }
        triplets.emplace_back(row, row, diag);
        b[row] = h2 * rhs[static_cast<Eigen::Index>(cell)];
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(cfg.tolerance);
    const int longest = grid.extents.maxCoeff();
    cg.setMaxIterations(cfg.max_iterations > 0 ? cfg.max_iterations : 20 * longest + 2000);
    cg.compute(A);
    if (b.norm() == 0.0) return field;
    const Eigen::VectorXd sol = cg.solve(b);
    if (cg.info() != Eigen::Success)
        throw SolverError("grid solve: conjugate gradients did not converge (residual " +
                          std::to_string(cg.error()) + " after " + std::to_string(cg.iterations()) + " iterations)");
    for (Eigen::Index row = 0; row < m; ++row) field.values[static_cast<Eigen::Index>(cell_of[static_cast<std::size_t>(row)])] = sol[row];
    return field;
}

ScalarField grid_torsion(const Domain& domain, const GridSolveConfig& cfg) {
    if (cfg.resolution < 16) throw ValidationError("grid_torsion: resolution must be at least 16");
    const GridSpec grid = grid_for(domain, cfg.resolution);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid.cell_count()));
    ScalarField field = solve_dirichlet_poisson(domain, grid, ones, cfg);
    for (auto& v : field.values) v = std::max(v, 0.0);
    return field;
}

ScalarField grid_torsion(const Domain& domain, int resolution) {
    GridSolveConfig cfg;
    cfg.resolution = resolution;
    return grid_torsion(domain, cfg);
}

namespace {

/// Exit time of one Euler–Maruyama path, capped at `horizon`; returns
/// horizon when the path survives.
double simulate_exit(const Domain& domain, const Point& x0, const PathConfig& cfg, double horizon, RandomStream& rng) {
    const int n = domain.dim();
    const double dt = cfg.dt;
    const double sigma = std::sqrt(2.0 * dt);
    // Beyond this distance from ∂D the bridge crossing probability is below e^{-49}.
    const double near = 7.0 * std::sqrt(dt);
    Point x = x0;
    Point y(n);
    double d = boundary_distance(domain, x);
    bool exact = true;
    double t = 0.0;
    while (t < horizon) {
        for (int i = 0; i < n; ++i) y[i] = x[i] + sigma * rng.gaussian();
        const double len = (y - x).norm();
        const double lb = d - len;
        if (lb > near) {
            x.swap(y);
            d = lb;
            exact = false;
            t += dt;
            continue;
        }
        if (!contains(domain, y)) return std::min(horizon, t + crossing_fraction(domain, x, y, 20) * dt);
        const double d2 = boundary_distance(domain, y);
        if (cfg.bridge_correction) {
            const double d1 = exact ? d : boundary_distance(domain, x);
            const double u = rng.uniform();
            if (u < std::exp(-d1 * d2 / dt)) return std::min(horizon, t + 0.5 * dt);
        }
        x.swap(y);
        d = d2;
        exact = true;
        t += dt;
    }
    return horizon;
}

std::vector<double> exit_times(const Domain& domain, const Point& x, const PathConfig& cfg, double horizon) {
    std::vector<double> times(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t k) {
        RandomStream rng(cfg.seed, k);
        times[k] = simulate_exit(domain, x, cfg, horizon, rng);
    });
    return times;
}

void validate_path_config(const PathConfig& cfg, const char* op) {
    if (!(cfg.dt > 0.0)) throw ValidationError(std::string(op) + ": dt must be positive");
    if (cfg.paths < 1) throw ValidationError(std::string(op) + ": paths must be at least 1");
    if (cfg.t_max < 0.0) throw ValidationError(std::string(op) + ": t_max must be positive");
}

}  // namespace

Estimate exit_moment_mc(const Domain& domain, const Point& x, double p, const PathConfig& cfg) {
    require_point(domain, x, "exit_moment_mc");
    validate_path_config(cfg, "exit_moment_mc");
    if (!(p > 0.0)) throw ValidationError("exit_moment_mc: p must be positive");
    if (!contains(domain, x)) {
        if (on_boundary(domain, x)) {
            Estimate zero;
            zero.samples = cfg.paths;
            return zero;
        }
        throw ValidationError("exit_moment_mc: starting point is outside the domain");
    }
    const double diam = length_scale(domain);
    const double horizon = cfg.t_max > 0.0 ? cfg.t_max : 2.0 * diam * diam;
    std::vector<double> times = exit_times(domain, x, cfg, horizon);
    std::size_t alive = 0;
    for (double& t : times) {
        if (t >= horizon) ++alive;
        t = std::pow(t, p);
    }
    Estimate est = summarize(times);
    if (alive * 1000 > cfg.paths)
        est.warnings.push_back(std::to_string(alive) + " of " + std::to_string(cfg.paths) + " paths still alive at t_max");
    return est;
}

Estimate survival_mc(const Domain& domain, const Point& x, double t, const PathConfig& cfg) {
    require_point(domain, x, "survival_mc");
    validate_path_config(cfg, "survival_mc");
    if (!(t >= 0.0)) throw ValidationError("survival_mc: t must be non-negative");
    if (!contains(domain, x)) throw ValidationError("survival_mc: starting point is outside the domain");
    Estimate est;
    est.samples = cfg.paths;
    if (t == 0.0) {
        est.value = 1.0;
        return est;
    }
    const std::vector<double> times = exit_times(domain, x, cfg, t);
    std::size_t survived = 0;
    for (double s : times) survived += s >= t ? 1 : 0;
    const double q = static_cast<double>(survived) / static_cast<double>(cfg.paths);
    est.value = q;
    est.std_error = std::sqrt(q * (1.0 - q) / static_cast<double>(cfg.paths));
    return est;
}

double torsional_rigidity(const ScalarField& field) {
    field.validate();
    return field.grid.cell_volume() * field.values.sum();
}

double dirichlet_energy(const ScalarField& field) {
    const GridSpec& g = field.grid;
    const int n = g.dim();
    const std::size_t cells = g.cell_count();
    double sum = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const Eigen::VectorXi idx = g.multi_index(i);
        const double v = field.values[static_cast<Eigen::Index>(i)];
        for (int axis = 0; axis < n; ++axis) {
            const double next = idx[axis] + 1 < g.extents[axis]
                                    ? field.values[static_cast<Eigen::Index>(i) + g.stride(axis)]
                                    : 0.0;
            sum += (next - v) * (next - v);
        }
    }
    return sum * std::pow(g.h, n - 2);
}

double variational_bound(const ScalarField& field, const ScalarField& test) {
    if (field.grid.dim() != test.grid.dim() || field.grid.extents != test.grid.extents ||
        field.grid.h != test.grid.h || field.mask != test.mask)
        throw ValidationError("variational_bound: test field grid or mask does not match the domain field");
    for (std::size_t i = 0; i < test.size(); ++i)
        if (!test.mask[i] && test.values[static_cast<Eigen::Index>(i)] != 0.0)
            throw ValidationError("variational_bound: test field does not vanish outside the domain mask");
    return 2.0 * test.grid.cell_volume() * test.values.sum() - dirichlet_energy(test);
}

}  // namespace torsionlab
