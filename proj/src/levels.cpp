#include "torsionlab/levels.hpp"

#include "torsionlab/errors.hpp"
#include "torsionlab/format.hpp"
#include "torsionlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>

namespace torsionlab {

double DistributionFunction::operator()(double level) const {
    if (t.empty()) return 0.0;
    if (level <= t.front()) return mu.front();
    if (level >= t.back()) return 0.0;
    const auto it = std::upper_bound(t.begin(), t.end(), level);
    const auto j = static_cast<std::size_t>(it - t.begin());
    const double s = (level - t[j - 1]) / (t[j] - t[j - 1]);
    return mu[j - 1] + s * (mu[j] - mu[j - 1]);
}

DistributionFunction distribution_function(const ScalarField& field, int slices) {
    if (slices < 2) throw ValidationError("distribution_function: at least two slices required");
    if (field.size() == 0 || field.masked_count() == 0) throw ValidationError("distribution_function: empty field");
    field.validate();
    DistributionFunction d;
    d.total = field.masked_volume();
    const double top = field.max_value();
    if (top <= 0.0) {
        d.t = {0.0};
        d.mu = {d.total};
        return d;
    }
    std::vector<double> sorted(field.values.data(), field.values.data() + field.values.size());
    std::sort(sorted.begin(), sorted.end());
    const double hv = field.grid.cell_volume();
    d.t.resize(static_cast<std::size_t>(slices));
    d.mu.resize(static_cast<std::size_t>(slices));
    for (int i = 0; i < slices; ++i) {
        const double level = top * i / (slices - 1);
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), level);
        d.t[static_cast<std::size_t>(i)] = level;
        d.mu[static_cast<std::size_t>(i)] = hv * static_cast<double>(above);
    }
    d.mu.front() = d.total;
    d.mu.back() = 0.0;
    return d;
}

double ball_distribution(int n, double v, double t) {
    if (n < 1) throw ValidationError("ball_distribution: dimension must be positive");
    if (!(v > 0.0)) throw ValidationError("ball_distribution: volume must be positive");
    if (t < 0.0) return v;
    const double base = 1.0 - 2.0 * n * std::pow(unit_ball_volume(n), 2.0 / n) * std::pow(v, -2.0 / n) * t;
    if (base <= 0.0) return 0.0;
    return v * std::pow(base, 0.5 * n);
}

double t_star(const DistributionFunction& mu, double A, double theta) {
    if (!(A > 0.0)) throw ValidationError("t_star: undefined for A(D) = 0");
    if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("t_star: theta must lie in (0, 1)");
    if (mu.t.empty()) throw ValidationError("t_star: empty distribution function");
    const double c = mu.total * (1.0 - theta * A);
    if (!(mu.mu.front() > c)) return 0.0;
    std::size_t i = 0;
    while (i + 1 < mu.t.size() && mu.mu[i + 1] > c) ++i;
    if (i + 1 == mu.t.size()) return mu.t.back();
    const double drop = mu.mu[i] - mu.mu[i + 1];
    if (drop <= 0.0) return mu.t[i];
    return mu.t[i] + (mu.mu[i] - c) / drop * (mu.t[i + 1] - mu.t[i]);
}

double t_zero(int n, double A) {
    if (n < 1) throw ValidationError("t_zero: dimension must be positive");
    if (!(A > 0.0 && A <= 2.0)) throw ValidationError("t_zero: A must lie in (0, 2]");
    const double w = std::pow(unit_ball_volume(n), 2.0 / n);
    // 1 − (1 − A/8)^{2/n} without cancellation for small A.
    const double t0 = -std::expm1((2.0 / n) * std::log1p(-A / 8.0)) / (4.0 * n * w);
    if (t0 < t_zero_lower_bound(n, A) * (1.0 - 1e-12)) throw SolverError("t_zero: lower bound violated");
    return t0;
}

double t_zero_lower_bound(int n, double A) {
    return A / (16.0 * n * n * std::pow(unit_ball_volume(n), 2.0 / n));
}

double lp_norm(const DistributionFunction& mu, double p) {
    if (!(p >= 1.0)) throw ValidationError("lp_norm: p must be at least 1");
    if (mu.t.empty()) return 0.0;
    if (std::isinf(p)) return mu.t.size() > 1 ? mu.t.back() : 0.0;
    double sum = 0.0;
    auto f = [&](std::size_t i) { return p * std::pow(mu.t[i], p - 1.0) * mu.mu[i]; };
    for (std::size_t i = 1; i < mu.t.size(); ++i) sum += 0.5 * (f(i - 1) + f(i)) * (mu.t[i] - mu.t[i - 1]);
    return sum;
}

double field_lp_norm(const ScalarField& field, double p) {
    if (!(p >= 1.0)) throw ValidationError("field_lp_norm: p must be at least 1");
    if (std::isinf(p)) return field.max_value();
    double sum = 0.0;
    for (double v : field.values) sum += std::pow(std::abs(v), p);
    return field.grid.cell_volume() * sum;
}

double ball_lp_norm(int n, double v, double p) {
    if (n < 1) throw ValidationError("ball_lp_norm: dimension must be positive");
    if (!(v > 0.0)) throw ValidationError("ball_lp_norm: volume must be positive");
    if (!(p >= 1.0) || std::isinf(p)) throw ValidationError("ball_lp_norm: p must be finite and at least 1");
    const double unit = 0.5 * n * beta_function(p + 1.0, 0.5 * n) /
                        (std::pow(2.0 * n, p) * std::pow(unit_ball_volume(n), 2.0 * p / n));
    return unit * std::pow(v, (2.0 * p + n) / n);
}

double ball_sup(int n, double v) {
    const double R = equivalent_ball_radius(v, n);
    return R * R / (2.0 * n);
}

double RadialProfile::operator()(double r) const {
    if (radius.empty() || r > radius.back()) return 0.0;
    const auto it = std::lower_bound(radius.begin(), radius.end(), r);
    return value[static_cast<std::size_t>(it - radius.begin())];
}

namespace {

std::vector<double> sorted_positive(const ScalarField& field) {
    std::vector<double> vals;
    for (double v : field.values)
        if (v > 0.0) vals.push_back(v);
    std::sort(vals.begin(), vals.end(), std::greater<>());
    return vals;
}

}  // namespace

RadialProfile rearrangement(const ScalarField& field) {
    if (field.size() == 0) throw ValidationError("rearrangement: empty field");
    field.validate();
    RadialProfile prof;
    prof.n = field.dim();
    prof.cell_volume = field.grid.cell_volume();
    prof.value = sorted_positive(field);
    if (prof.value.empty()) throw ValidationError("rearrangement: field has no positive values");
    prof.radius.resize(prof.value.size());
    for (std::size_t k = 0; k < prof.value.size(); ++k)
        prof.radius[k] = equivalent_ball_radius(static_cast<double>(k + 1) * prof.cell_volume, prof.n);
    return prof;
}

ScalarField rearranged_field(const ScalarField& field) {
    if (field.size() == 0) throw ValidationError("rearranged_field: empty field");
    field.validate();
    const std::vector<double> vals = sorted_positive(field);
    if (vals.empty()) throw ValidationError("rearranged_field: field has no positive values");
    const int n = field.dim();
    const double h = field.grid.h;
    const double R = equivalent_ball_radius(static_cast<double>(vals.size()) * field.grid.cell_volume(), n);
    int count = static_cast<int>(std::ceil(2.0 * R / h)) + 2;
    if (count % 2 == 0) ++count;
    count += 2;
    GridSpec g;
    g.h = h;
    g.extents = Eigen::VectorXi::Constant(n, count);
    g.origin = Point::Constant(n, -0.5 * count * h);
    const std::size_t cells = g.cell_count();
    std::vector<std::size_t> order(cells);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> r2(cells);
    for (std::size_t i = 0; i < cells; ++i) r2[i] = g.center(i).squaredNorm();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r2[a] < r2[b]; });
    ScalarField out;
    out.grid = g;
    out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells));
    out.mask.assign(cells, 0);
    for (std::size_t k = 0; k < vals.size(); ++k) {
        out.values[static_cast<Eigen::Index>(order[k])] = vals[k];
        out.mask[order[k]] = 1;
    }
    return out;
}

namespace {

/// P(Σ w_a ξ_a ≤ x) for independent ξ_a uniform on [0, 1], w_a > 0.
double uniform_sum_cdf(const std::vector<double>& w, double x) {
    const std::size_t n = w.size();
    if (n == 0) return x >= 0.0 ? 1.0 : 0.0;
    double total = 0.0;
    for (double wa : w) total += wa;
    if (x <= 0.0) return 0.0;
    if (x >= total) return 1.0;
    double norm = 1.0;
    for (std::size_t a = 0; a < n; ++a) norm *= w[a] * static_cast<double>(a + 1);
    double sum = 0.0;
    for (std::size_t subset = 0; subset < (std::size_t{1} << n); ++subset) {
        double shift = 0.0;
        int bits = 0;
        for (std::size_t a = 0; a < n; ++a)
            if (subset & (std::size_t{1} << a)) {
                shift += w[a];
                ++bits;
            }
        const double y = x - shift;
        if (y > 0.0) sum += (bits % 2 ? -1.0 : 1.0) * std::pow(y, static_cast<double>(n));
    }
    return std::clamp(sum / norm, 0.0, 1.0);
}

}  // namespace

double energy_derivative_check(const ScalarField& field, int levels) {
    if (levels < 8) throw ValidationError("energy_derivative_check: at least 8 levels required");
    field.validate();
    const GridSpec& g = field.grid;
    const int n = g.dim();
    const double top = field.max_value();
    double low = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < field.size(); ++i)
        if (field.mask[i]) low = std::min(low, field.values[static_cast<Eigen::Index>(i)]);
    if (!(top > 0.0) || low >= top) throw ValidationError("energy_derivative_check: degenerate levels (constant field)");

    // Per-cell |∇u|² h^n, each edge's squared difference split between its
    // cells, and the spread of u across the cell under a linear model.
    std::vector<double> energy(field.size(), 0.0);
    std::vector<std::vector<double>> widths(field.size());
    const double hn2 = std::pow(g.h, n - 2);
    for (std::size_t i = 0; i < field.size(); ++i) {
        const Eigen::VectorXi m = g.multi_index(i);
        const auto ii = static_cast<Eigen::Index>(i);
        double e = 0.0;
        for (int a = 0; a < n; ++a) {
            const auto st = static_cast<Eigen::Index>(g.stride(a));
            const double up = m[a] + 1 < g.extents[a] ? field.values[ii + st] : 0.0;
            const double dn = m[a] > 0 ? field.values[ii - st] : 0.0;
            const double v = field.values[ii];
            e += 0.5 * ((up - v) * (up - v) + (v - dn) * (v - dn));
            const double w = 0.5 * std::abs(up - dn);
            if (w > 1e-9 * top) widths[i].push_back(w);
        }
        energy[i] = e * hn2;
    }
    const DistributionFunction mu = distribution_function(field, levels);
    std::vector<double> E(static_cast<std::size_t>(levels), 0.0);
    for (int k = 0; k < levels; ++k) {
        const double level = mu.t[static_cast<std::size_t>(k)];
        double s = 0.0;
        for (std::size_t i = 0; i < field.size(); ++i) {
            if (energy[i] == 0.0) continue;
            const auto& w = widths[i];
            double half = 0.0;
            for (double wa : w) half += 0.5 * wa;
            const double v = field.values[static_cast<Eigen::Index>(i)];
            if (v - half > level) {
                s += energy[i];
            } else if (v + half > level) {
                s += energy[i] * (1.0 - uniform_sum_cdf(w, level - (v - half)));
            }
        }
        E[static_cast<std::size_t>(k)] = s;
    }
    double worst = 0.0;
    for (int k = 0; k + 1 < levels; ++k) {
        const double a = mu.t[static_cast<std::size_t>(k)], b = mu.t[static_cast<std::size_t>(k) + 1];
        const double mid = 0.5 * (a + b);
        if (mid < 0.1 * top || mid > 0.9 * top) continue;
        const double slope = (E[static_cast<std::size_t>(k)] - E[static_cast<std::size_t>(k) + 1]) / (b - a);
        const double target = 0.5 * (mu.mu[static_cast<std::size_t>(k)] + mu.mu[static_cast<std::size_t>(k) + 1]);
        if (target > 0.0) worst = std::max(worst, std::abs(slope - target) / target);
    }
    return worst;
}

Domain superlevel_domain(const ScalarField& field, double t) {
    if (!(t >= 0.0)) throw ValidationError("superlevel_domain: t must be non-negative");
    const auto count = static_cast<double>((field.values.array() > t).count());
    if (count == 0.0) throw ValidationError("superlevel_domain: level set is empty");
    const int n = field.grid.dim();
    Point lo = field.grid.origin;
    Point hi(n);
    for (int i = 0; i < n; ++i) hi[i] = lo[i] + field.grid.h * field.grid.extents[i];
    auto shared = std::make_shared<ScalarField>(field);
    return Domain::implicit(
        n, [shared, t](const Point& x) { return shared->value_at(x) > t; }, lo, hi, count * field.grid.cell_volume(),
        "superlevel(t=" + format_double(t) + ")");
}

void write_distribution_csv(std::ostream& out, const DistributionFunction& mu) {
    out << "t,mu\n";
    for (std::size_t i = 0; i < mu.t.size(); ++i) out << format_double(mu.t[i]) << ',' << format_double(mu.mu[i]) << '\n';
}

}  // namespace torsionlab
