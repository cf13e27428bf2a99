#include "torsionlab/asymmetry.hpp"

#include "torsionlab/errors.hpp"
#include "torsionlab/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>

namespace torsionlab {

namespace {

using Interval = std::pair<double, double>;

void add_interval(std::vector<Interval>& out, double a, double b) {
    if (b > a) out.emplace_back(a, b);
}

/// Signed area of (disk of radius R about 0) ∩ triangle(0, p, q).
double triangle_disk_area(const Eigen::Vector2d& p, const Eigen::Vector2d& q, double R) {
    const Eigen::Vector2d d = q - p;
    const double a = d.squaredNorm();
    if (a == 0.0) return 0.0;
    const double b = p.dot(d);
    const double c = p.squaredNorm() - R * R;
    std::vector<double> cuts{0.0};
    const double disc = b * b - a * c;
    if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        for (double t : {(-b - sq) / a, (-b + sq) / a})
            if (t > 0.0 && t < 1.0) cuts.push_back(t);
    }
    cuts.push_back(1.0);
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Eigen::Vector2d u = p + cuts[i] * d;
        const Eigen::Vector2d v = p + cuts[i + 1] * d;
        const double cross = u.x() * v.y() - u.y() * v.x();
        const Eigen::Vector2d mid = 0.5 * (u + v);
        if (mid.squaredNorm() <= R * R)
            area += 0.5 * cross;
        else
            area += 0.5 * R * R * std::atan2(cross, u.dot(v));
    }
    return area;
}

double polygon_disk_area(const std::vector<Eigen::Vector2d>& v, const Point& c, double R) {
    const Eigen::Vector2d cc(c[0], c[1]);
    double area = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) area += triangle_disk_area(v[i] - cc, v[(i + 1) % v.size()] - cc, R);
    return std::abs(area);
}

/// Frame in which rows are scanned: a point with row coordinates (x, y) is x·ex + y·ey.
struct Frame {
    Eigen::Vector2d ex{1.0, 0.0};
    Eigen::Vector2d ey{0.0, 1.0};
};

Frame scan_frame(const Domain& domain) {
    Frame f;
    if (domain.kind() == DomainKind::stadium) {
        // Rows across the capsule's axis see a chord that is continuous in y.
        const auto& s = domain.as<StadiumShape>();
        const Eigen::Vector2d d(s.b[0] - s.a[0], s.b[1] - s.a[1]);
        if (d.norm() > 0.0) {
            f.ey = d.normalized();
            f.ex = Eigen::Vector2d(f.ey.y(), -f.ey.x());
        }
    } else if (domain.kind() == DomainKind::implicit) {
        // Tilted rows keep chords continuous across axis-aligned edges such as
        // those of cell-union level sets.
        const double t = std::numbers::pi / 6.0;
        f.ex = Eigen::Vector2d(std::cos(t), std::sin(t));
        f.ey = Eigen::Vector2d(-std::sin(t), std::cos(t));
    }
    return f;
}

/// D ∩ (row at height y), restricted to [xa, xb], as disjoint intervals in
/// row coordinates.
std::vector<Interval> row_intervals(const Domain& domain, const Frame& fr, double y, double xa, double xb,
                                    const AsymmetryConfig& cfg) {
    std::vector<Interval> out;
    switch (domain.kind()) {
        case DomainKind::ball: {
            const auto& b = domain.as<BallShape>();
            const double dy = y - b.center[1];
            if (std::abs(dy) < b.radius) {
                const double s = std::sqrt(b.radius * b.radius - dy * dy);
                add_interval(out, b.center[0] - s, b.center[0] + s);
            }
            break;
        }
        case DomainKind::ellipse: {
            const auto& e = domain.as<EllipseShape>();
            const double dy = (y - e.center[1]) / e.semi_y;
            if (std::abs(dy) < 1.0) {
                const double s = e.semi_x * std::sqrt(1.0 - dy * dy);
                add_interval(out, e.center[0] - s, e.center[0] + s);
            }
            break;
        }
        case DomainKind::stadium: {
            const auto& s = domain.as<StadiumShape>();
            const Eigen::Vector2d a(s.a[0], s.a[1]), b(s.b[0], s.b[1]);
            const double x0 = a.dot(fr.ex);
            const double ya = a.dot(fr.ey), yb = b.dot(fr.ey);
            const double dy = y < std::min(ya, yb) ? std::min(ya, yb) - y : (y > std::max(ya, yb) ? y - std::max(ya, yb) : 0.0);
            if (dy < s.radius) {
                const double half = std::sqrt(s.radius * s.radius - dy * dy);
                add_interval(out, x0 - half, x0 + half);
            }
            break;
        }
        case DomainKind::implicit: {
            const int m = std::max(cfg.implicit_samples, 2);
            Point p(2);
            auto inside = [&](double x) {
                p = x * fr.ex + y * fr.ey;
                return contains(domain, p);
            };
            auto edge = [&](double a, double b, bool a_inside) {
                for (int it = 0; it < 40; ++it) {
                    const double mid = 0.5 * (a + b);
                    if (inside(mid) == a_inside)
                        a = mid;
                    else
                        b = mid;
                }
                return 0.5 * (a + b);
            };
            const double dx = (xb - xa) / m;
            bool prev = inside(xa + 0.5 * dx);
            double start = xa;
            for (int k = 1; k < m; ++k) {
                const double xk = xa + (k + 0.5) * dx;
                const bool cur = inside(xk);
                if (cur != prev) {
                    const double x = edge(xk - dx, xk, prev);
                    if (cur)
                        start = x;
                    else
                        add_interval(out, start, x);
                    prev = cur;
                }
            }
            if (prev) add_interval(out, start, xb);
            break;
        }
        default:
            throw Error("asymmetry: row scan not available for this domain kind");
    }
    return out;
}

double overlap_2d(const Domain& domain, const Point& c, double R, const AsymmetryConfig& cfg) {
    if (domain.kind() == DomainKind::polygon) return polygon_disk_area(domain.as<PolygonShape>().vertices, c, R);
    if (domain.kind() == DomainKind::rectangle) {
        const auto& r = domain.as<RectangleShape>();
        return polygon_disk_area({{r.lo[0], r.lo[1]}, {r.hi[0], r.lo[1]}, {r.hi[0], r.hi[1]}, {r.lo[0], r.hi[1]}}, c, R);
    }
    const int rows = domain.kind() == DomainKind::implicit ? cfg.implicit_rows : cfg.scan_rows;
    if (rows < 8) throw ValidationError("asymmetry: degenerate scan grid");
    const Frame fr = scan_frame(domain);
    const Eigen::Vector2d c2(c[0], c[1]);
    const double cx = c2.dot(fr.ex), cy = c2.dot(fr.ey);
    // y = c_y − R cos φ with midpoint nodes in φ: the weight R sin φ absorbs
    // the square-root ends of the ball's chords.
    double area = 0.0;
    for (int k = 0; k < rows; ++k) {
        const double phi = std::numbers::pi * (k + 0.5) / rows;
        const double y = cy - R * std::cos(phi);
        const double w = R * std::sin(phi);
        const double xa = cx - w, xb = cx + w;
        double len = 0.0;
        for (const auto& [a, b] : row_intervals(domain, fr, y, xa, xb, cfg)) len += std::max(0.0, std::min(b, xb) - std::max(a, xa));
        area += len * w;
    }
    return area * std::numbers::pi / rows;
}

double overlap_voxel(const Domain& domain, const Point& c, double R, const AsymmetryConfig& cfg) {
    const int n = domain.dim();
    const int m = cfg.voxel_resolution;
    if (m < 4) throw ValidationError("asymmetry: degenerate voxel grid");
    const double h = 2.0 * R / m;
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(m);
    std::size_t count = 0;
    Point x(n);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (int i = 0; i < n; ++i) {
            x[i] = c[i] - R + (static_cast<double>(rem % static_cast<std::size_t>(m)) + 0.5) * h;
            rem /= static_cast<std::size_t>(m);
        }
        if ((x - c).squaredNorm() < R * R && contains(domain, x)) ++count;
    }
    return static_cast<double>(count) * std::pow(h, n);
}

double overlap(const Domain& domain, const Point& c, double R, const AsymmetryConfig& cfg) {
    if (c.size() != domain.dim()) throw ValidationError("asymmetry: center dimension does not match domain");
    return domain.dim() == 2 ? overlap_2d(domain, c, R, cfg) : overlap_voxel(domain, c, R, cfg);
}

struct Objective {
    const Domain& domain;
    const AsymmetryConfig& cfg;
    double vol;
    double R;
    double operator()(const Point& c) const { return std::clamp(2.0 * (1.0 - overlap(domain, c, R, cfg) / vol), 0.0, 2.0); }
};

/// Nelder–Mead from `start` with initial edge `step`.
AsymmetryStage simplex_search(const Objective& f, const Point& start, double step, double tol, int max_evals, bool& stagnated) {
    const int n = static_cast<int>(start.size());
    std::vector<Point> v(static_cast<std::size_t>(n) + 1, start);
    std::vector<double> fv(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) + 1][i] += step;
    int evals = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        fv[i] = f(v[i]);
        ++evals;
    }
    std::vector<std::size_t> order(v.size());
    bool converged = false;
    while (evals < max_evals) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        double size = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) size = std::max(size, (v[i] - v[best]).norm());
        if (size < tol) {
            converged = true;
            break;
        }
        Point centroid = Point::Zero(n);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (i != worst) centroid += v[i];
        centroid /= n;
        const Point xr = centroid + (centroid - v[worst]);
        const double fr = f(xr);
        ++evals;
        if (fr < fv[best]) {
            const Point xe = centroid + 2.0 * (centroid - v[worst]);
            const double fe = f(xe);
            ++evals;
            if (fe < fr) {
                v[worst] = xe;
                fv[worst] = fe;
            } else {
                v[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            v[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const Point xc = outside ? Point(centroid + 0.5 * (xr - centroid)) : Point(centroid + 0.5 * (v[worst] - centroid));
            const double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, fv[worst])) {
                v[worst] = xc;
                fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i == best) continue;
                    v[i] = v[best] + 0.5 * (v[i] - v[best]);
                    fv[i] = f(v[i]);
                    ++evals;
                }
            }
        }
    }
    if (!converged) stagnated = true;
    const auto it = std::min_element(fv.begin(), fv.end());
    return {"simplex", v[static_cast<std::size_t>(it - fv.begin())], *it, evals};
}

std::vector<Point> lattice_points(const Box& box, double step) {
    const int n = static_cast<int>(box.lo.size());
    Eigen::VectorXi counts(n);
    for (int i = 0; i < n; ++i) counts[i] = static_cast<int>(std::floor((box.hi[i] - box.lo[i]) / step + 1e-9)) + 1;
    std::vector<Point> pts;
    Eigen::VectorXi k = Eigen::VectorXi::Zero(n);
    for (;;) {
        Point p(n);
        for (int i = 0; i < n; ++i) {
            // Centre the lattice in the box so symmetric domains get symmetric lattices.
            const double slack = (box.hi[i] - box.lo[i]) - (counts[i] - 1) * step;
            p[i] = box.lo[i] + 0.5 * slack + k[i] * step;
        }
        pts.push_back(p);
        int a = 0;
        while (a < n && ++k[a] >= counts[a]) k[a++] = 0;
        if (a == n) break;
    }
    return pts;
}

double domain_volume(const Domain& domain) { return volume(domain).value; }

}  // namespace

std::string AsymmetryResult::to_json() const {
    nlohmann::json j;
    j["A"] = A;
    j["center"] = std::vector<double>(center.data(), center.data() + center.size());
    j["evaluations"] = evaluations;
    j["stagnated"] = stagnated;
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : trace) {
        stages.push_back({{"stage", s.stage},
                          {"center", std::vector<double>(s.center.data(), s.center.data() + s.center.size())},
                          {"value", s.value},
                          {"evaluations", s.evaluations}});
    }
    j["trace"] = stages;
    return j.dump();
}

double ball_overlap(const Domain& domain, const Point& c, const AsymmetryConfig& cfg) {
    const double vol = domain_volume(domain);
    return overlap(domain, c, equivalent_ball_radius(vol, domain.dim()), cfg);
}

double symdiff_fraction(const Domain& domain, const Point& c, const AsymmetryConfig& cfg) {
    const double vol = domain_volume(domain);
    const Objective f{domain, cfg, vol, equivalent_ball_radius(vol, domain.dim())};
    return f(c);
}

AsymmetryResult asymmetry_scan(const Domain& domain, double step, const AsymmetryConfig& cfg) {
    if (!(step > 0.0)) throw ValidationError("asymmetry_scan: step must be positive");
    const double vol = domain_volume(domain);
    const Objective f{domain, cfg, vol, equivalent_ball_radius(vol, domain.dim())};
    const std::vector<Point> pts = lattice_points(domain.bounding_box(), step);
    std::vector<double> vals(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { vals[i] = f(pts[i]); });
    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    AsymmetryResult res;
    res.A = vals[best];
    res.center = pts[best];
    res.evaluations = static_cast<int>(pts.size());
    res.trace.push_back({"lattice", pts[best], vals[best], res.evaluations});
    return res;
}

AsymmetryResult fraenkel(const Domain& domain, const AsymmetryConfig& cfg) {
    if (cfg.lattice_divisions < 1) throw ValidationError("fraenkel: lattice_divisions must be positive");
    AsymmetryResult res;
    if (domain.is_ball()) {
        res.center = domain.kind() == DomainKind::ball ? domain.as<BallShape>().center
                                                       : Point(domain.as<EllipseShape>().center);
        res.A = 0.0;
        res.trace.push_back({"shortcut", res.center, 0.0, 0});
        return res;
    }
    const double vol = domain_volume(domain);
    const Objective f{domain, cfg, vol, equivalent_ball_radius(vol, domain.dim())};
    const double diam = length_scale(domain);
    const double step = diam / cfg.lattice_divisions;

    const std::vector<Point> pts = lattice_points(domain.bounding_box(), step);
    std::vector<double> vals(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { vals[i] = f(pts[i]); });
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    res.evaluations = static_cast<int>(pts.size());
    res.trace.push_back({"lattice", pts[order.front()], vals[order.front()], res.evaluations});
    res.A = vals[order.front()];
    res.center = pts[order.front()];

    const int starts = std::min<int>(cfg.refine_starts, static_cast<int>(pts.size()));
    for (int s = 0; s < starts; ++s) {
        const AsymmetryStage st =
            simplex_search(f, pts[order[static_cast<std::size_t>(s)]], step, cfg.center_tolerance * diam, cfg.max_evaluations, res.stagnated);
        res.evaluations += st.evaluations;
        res.trace.push_back(st);
        if (st.value < res.A) {
            res.A = st.value;
            res.center = st.center;
        }
    }
    if (domain.kind() == DomainKind::ellipse) {
        // The ellipse is symmetric under both axis reflections; its centre is
        // taken as the optimum unless the search found something lower.
        const Point c = domain.as<EllipseShape>().center;
        const double v = f(c);
        ++res.evaluations;
        res.trace.push_back({"symmetry", c, v, 1});
        if (v <= res.A + 1e-9) {
            res.A = v;
            res.center = c;
        }
    }
    return res;
}

double transfer_lower_bound(double A_D, double k) {
    if (!(k > 0.0 && k < 0.5)) throw ValidationError("transfer_lower_bound: k must lie in (0, 1/2)");
    if (!(A_D >= 0.0)) throw ValidationError("transfer_lower_bound: asymmetry must be non-negative");
    return (1.0 - 2.0 * k) * A_D;
}

}  // namespace torsionlab
