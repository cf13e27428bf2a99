#include "torsionlab/geometry.hpp"

#include "torsionlab/errors.hpp"
#include "torsionlab/random.hpp"
#include "torsionlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace torsionlab {

namespace {

void require_finite_point(const Point& p, std::string_view what) {
    if (p.size() < 1) throw ValidationError(std::string(what) + ": empty point");
    if (!p.allFinite()) throw ValidationError(std::string(what) + ": non-finite coordinate");
}

void require_dim(const Domain& d, const Point& x) {
    if (x.size() != d.dim()) {
        throw ValidationError("dimension mismatch: point has " + std::to_string(x.size()) +
                              " coordinates, domain has n=" + std::to_string(d.dim()));
    }
}

double segment_distance(const Point& x, const Point& a, const Point& b) {
    const Point ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (x - (a + t * ab)).norm();
}

double segment_distance2d(const Eigen::Vector2d& x, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (x - (a + t * ab)).norm();
}

// Distance from (y0, y1), y0, y1 >= 0, to the ellipse with semi-axes e0 >= e1,
// by bisection on the root of the closest-point equation (Eberly).
double ellipse_root(double r0, double z0, double z1, double g) {
    const double n0 = r0 * z0;
    double s0 = z1 - 1.0;
    double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
    double s = 0.0;
    for (int i = 0; i < 1100; ++i) {
        s = 0.5 * (s0 + s1);
        if (s == s0 || s == s1) break;
        const double ratio0 = n0 / (s + r0);
        const double ratio1 = z1 / (s + 1.0);
        g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if (g > 0.0) {
            s0 = s;
        } else if (g < 0.0) {
            s1 = s;
        } else {
            break;
        }
    }
    return s;
}

double ellipse_distance_quadrant(double e0, double e1, double y0, double y1) {
    if (y1 > 0.0) {
        if (y0 > 0.0) {
            const double z0 = y0 / e0;
            const double z1 = y1 / e1;
            const double g = z0 * z0 + z1 * z1 - 1.0;
            if (g == 0.0) return 0.0;
            const double r0 = (e0 / e1) * (e0 / e1);
            const double sbar = ellipse_root(r0, z0, z1, g);
            const double x0 = r0 * y0 / (sbar + r0);
            const double x1 = y1 / (sbar + 1.0);
            return std::hypot(x0 - y0, x1 - y1);
        }
        return std::abs(y1 - e1);
    }
    const double numer0 = e0 * y0;
    const double denom0 = e0 * e0 - e1 * e1;
    if (numer0 < denom0) {
        const double xde0 = numer0 / denom0;
        const double x0 = e0 * xde0;
        const double x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0));
        return std::hypot(x0 - y0, x1);
    }
    return std::abs(y0 - e0);
}

double ellipse_distance(const EllipseShape& e, const Point& x) {
    double y0 = std::abs(x[0] - e.center[0]);
    double y1 = std::abs(x[1] - e.center[1]);
    double e0 = e.semi_x;
    double e1 = e.semi_y;
    if (e1 > e0) {
        std::swap(e0, e1);
        std::swap(y0, y1);
    }
    if (e0 == e1) return e0 - std::hypot(y0, y1);
    return ellipse_distance_quadrant(e0, e1, y0, y1);
}

bool polygon_winding_inside(const std::vector<Eigen::Vector2d>& v, const Eigen::Vector2d& p) {
    int winding = 0;
    const std::size_t m = v.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Eigen::Vector2d& a = v[i];
        const Eigen::Vector2d& b = v[(i + 1) % m];
        const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && cross > 0.0) ++winding;
        } else {
            if (b.y() <= p.y() && cross < 0.0) --winding;
        }
    }
    return winding != 0;
}

double polygon_edge_distance(const std::vector<Eigen::Vector2d>& v, const Eigen::Vector2d& p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        best = std::min(best, segment_distance2d(p, v[i], v[(i + 1) % v.size()]));
    }
    return best;
}

double polygon_area(const std::vector<Eigen::Vector2d>& v) {
    double twice = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % v.size()];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * std::abs(twice);
}

// Fixed probe directions for implicit domains.
std::vector<Point> probe_directions(int n) {
    constexpr int count = 64;
    std::vector<Point> dirs;
    dirs.reserve(count);
    if (n == 1) {
        dirs.push_back(Point::Constant(1, 1.0));
        dirs.push_back(Point::Constant(1, -1.0));
        return dirs;
    }
    if (n == 2) {
        for (int k = 0; k < count; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / count;
            Point d(2);
            d << std::cos(phi), std::sin(phi);
            dirs.push_back(d);
        }
        return dirs;
    }
    if (n == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / count;
            const double rho = std::sqrt(1.0 - z * z);
            Point d(3);
            d << rho * std::cos(golden * k), rho * std::sin(golden * k), z;
            dirs.push_back(d);
        }
        return dirs;
    }
    for (int k = 0; k < count; ++k) {
        RandomStream rng(0x5eedULL, static_cast<std::uint64_t>(k));
        dirs.push_back(rng.direction(n));
    }
    return dirs;
}

double implicit_distance(const ImplicitShape& s, const Point& x) {
    const int n = static_cast<int>(x.size());
    const double reach = (s.hi - s.lo).norm();
    const double step = reach / 256.0;
    static thread_local std::vector<Point> dirs;
    if (dirs.empty() || dirs.front().size() != n) dirs = probe_directions(n);
    double best = reach;
    for (const Point& d : dirs) {
        double inside_t = 0.0;
        double outside_t = reach;
        for (double t = step; t <= reach; t += step) {
            if (!s.inside(x + t * d)) {
                outside_t = t;
                break;
            }
            inside_t = t;
            if (inside_t >= best) break;
        }
        if (inside_t >= best) continue;
        for (int it = 0; it < 48; ++it) {
            const double mid = 0.5 * (inside_t + outside_t);
            if (s.inside(x + mid * d)) {
                inside_t = mid;
            } else {
                outside_t = mid;
            }
        }
        best = std::min(best, inside_t);
    }
    return 0.5 * best;
}

Box box_of_points(const Point& lo, const Point& hi) { return Box{lo, hi}; }

}  // namespace

std::string_view to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::ball: return "ball";
        case DomainKind::ellipse: return "ellipse";
        case DomainKind::rectangle: return "rectangle";
        case DomainKind::polygon: return "polygon";
        case DomainKind::stadium: return "stadium";
        case DomainKind::implicit: return "implicit";
    }
    return "unknown";
}

Domain::Domain(Shape shape, int dim, Box box, std::optional<double> volume_hint)
    : shape_(std::move(shape)), dim_(dim), box_(std::move(box)), volume_hint_(volume_hint) {}

Domain Domain::ball(Point center, double radius) {
    require_finite_point(center, "ball center");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("ball: radius must be positive");
    const int n = static_cast<int>(center.size());
    Point r = Point::Constant(n, radius);
    Box box = box_of_points(center - r, center + r);
    const double vol = unit_ball_volume(n) * std::pow(radius, n);
    return Domain(BallShape{std::move(center), radius}, n, std::move(box), vol);
}

Domain Domain::disk(double radius) { return ball(Point::Zero(2), radius); }

Domain Domain::ellipse(double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ValidationError("ellipse: eps must be non-negative");
    return ellipse_axes(1.0, 1.0 + eps);
}

Domain Domain::ellipse_axes(double semi_x, double semi_y, Eigen::Vector2d center) {
    if (!(semi_x > 0.0) || !(semi_y > 0.0) || !std::isfinite(semi_x) || !std::isfinite(semi_y)) {
        throw ValidationError("ellipse: semi-axes must be positive");
    }
    if (!center.allFinite()) throw ValidationError("ellipse: non-finite center");
    Point lo(2), hi(2);
    lo << center.x() - semi_x, center.y() - semi_y;
    hi << center.x() + semi_x, center.y() + semi_y;
    return Domain(EllipseShape{center, semi_x, semi_y}, 2, Box{lo, hi}, std::numbers::pi * semi_x * semi_y);
}

Domain Domain::rectangle(Point lo, Point hi) {
    require_finite_point(lo, "rectangle corner");
    require_finite_point(hi, "rectangle corner");
    if (lo.size() != hi.size()) throw ValidationError("rectangle: corners have different dimensions");
    if (!((hi - lo).array() > 0.0).all()) throw ValidationError("rectangle: corners must satisfy lo < hi");
    const int n = static_cast<int>(lo.size());
    const double vol = (hi - lo).prod();
    Box box{lo, hi};
    return Domain(RectangleShape{std::move(lo), std::move(hi)}, n, std::move(box), vol);
}

Domain Domain::unit_square() { return rectangle(Point::Zero(2), Point::Ones(2)); }

Domain Domain::polygon(std::vector<Eigen::Vector2d> vertices) {
    if (vertices.size() < 3) throw ValidationError("polygon: at least 3 vertices required");
    Point lo = Point::Constant(2, std::numeric_limits<double>::infinity());
    Point hi = Point::Constant(2, -std::numeric_limits<double>::infinity());
    for (const auto& v : vertices) {
        if (!v.allFinite()) throw ValidationError("polygon: non-finite vertex");
        lo = lo.cwiseMin(Point(v));
        hi = hi.cwiseMax(Point(v));
    }
    const double area = polygon_area(vertices);
    if (!(area > 0.0)) throw ValidationError("polygon: zero area");
    return Domain(PolygonShape{std::move(vertices)}, 2, Box{lo, hi}, area);
}

Domain Domain::stadium(Point a, Point b, double radius) {
    require_finite_point(a, "capsule endpoint");
    require_finite_point(b, "capsule endpoint");
    if (a.size() != b.size()) throw ValidationError("stadium: endpoints have different dimensions");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("stadium: radius must be positive");
    const int n = static_cast<int>(a.size());
    const Point r = Point::Constant(n, radius);
    Box box{a.cwiseMin(b) - r, a.cwiseMax(b) + r};
    const double len = (b - a).norm();
    double vol = unit_ball_volume(n) * std::pow(radius, n);
    if (n >= 2) vol += unit_ball_volume(n - 1) * std::pow(radius, n - 1) * len;
    else vol += len;
    return Domain(StadiumShape{std::move(a), std::move(b), radius}, n, std::move(box), vol);
}

Domain Domain::implicit(int n, std::function<bool(const Point&)> inside, Point lo, Point hi,
                        std::optional<double> volume_hint, std::string label) {
    if (n < 1) throw ValidationError("implicit: dimension must be at least 1");
    if (!inside) throw ValidationError("implicit: missing inside-predicate");
    if (lo.size() != n || hi.size() != n) throw ValidationError("implicit: bounding box dimension mismatch");
    if (!((hi - lo).array() > 0.0).all()) throw ValidationError("implicit: empty bounding box");
    if (volume_hint && !(*volume_hint > 0.0)) throw ValidationError("implicit: volume must be positive");
    Box box{lo, hi};
    return Domain(ImplicitShape{std::move(inside), std::move(lo), std::move(hi), std::move(label)}, n,
                  std::move(box), volume_hint);
}

DomainKind Domain::kind() const { return static_cast<DomainKind>(shape_.index()); }

bool Domain::is_ball() const {
    if (kind() == DomainKind::ball) return true;
    if (kind() == DomainKind::ellipse) {
        const auto& e = as<EllipseShape>();
        return e.semi_x == e.semi_y;
    }
    return false;
}

bool contains(const Domain& domain, const Point& x) {
    require_dim(domain, x);
    switch (domain.kind()) {
        case DomainKind::ball: {
            const auto& b = domain.as<BallShape>();
            return (x - b.center).squaredNorm() < b.radius * b.radius;
        }
        case DomainKind::ellipse: {
            const auto& e = domain.as<EllipseShape>();
            const double u = (x[0] - e.center[0]) / e.semi_x;
            const double v = (x[1] - e.center[1]) / e.semi_y;
            return u * u + v * v < 1.0;
        }
        case DomainKind::rectangle: {
            const auto& r = domain.as<RectangleShape>();
            return ((x - r.lo).array() > 0.0).all() && ((r.hi - x).array() > 0.0).all();
        }
        case DomainKind::polygon: {
            const auto& p = domain.as<PolygonShape>();
            const Eigen::Vector2d q(x[0], x[1]);
            if (!polygon_winding_inside(p.vertices, q)) return false;
            return polygon_edge_distance(p.vertices, q) >= 1e-12;
        }
        case DomainKind::stadium: {
            const auto& s = domain.as<StadiumShape>();
            return segment_distance(x, s.a, s.b) < s.radius;
        }
        case DomainKind::implicit: return domain.as<ImplicitShape>().inside(x);
    }
    return false;
}

bool on_boundary(const Domain& domain, const Point& x, double tol) {
    if (contains(domain, x)) return false;
    Point probe = x;
    for (int i = 0; i < domain.dim(); ++i) {
        for (const double s : {-tol, tol}) {
            probe[i] = x[i] + s;
            if (contains(domain, probe)) return true;
        }
        probe[i] = x[i];
    }
    return false;
}

VolumeEstimate volume(const Domain& domain, const VolumeConfig& cfg) {
    if (domain.volume_hint()) return {*domain.volume_hint(), 0.0, true};
    const int n = domain.dim();
    int res = cfg.resolution;
    if (res <= 0) res = std::max(16, static_cast<int>(std::pow(2.0, 20.0 / n)));
    const Box box = domain.bounding_box();
    const Point ext = box.extent();
    const double h = ext.maxCoeff() / res;
    Eigen::VectorXi counts(n);
    for (int i = 0; i < n; ++i) counts[i] = std::max(1, static_cast<int>(std::ceil(ext[i] / h)));
    const Point origin = box.center() - 0.5 * h * counts.cast<double>();
    std::size_t inside = 0;
    Eigen::VectorXi idx = Eigen::VectorXi::Zero(n);
    Point x(n);
    for (;;) {
        for (int i = 0; i < n; ++i) x[i] = origin[i] + (idx[i] + 0.5) * h;
        if (contains(domain, x)) ++inside;
        int axis = 0;
        while (axis < n && ++idx[axis] == counts[axis]) idx[axis++] = 0;
        if (axis == n) break;
    }
    if (inside == 0) throw SolverError("volume: degenerate sampling, no grid cell falls inside the domain");
    double surface = 0.0;
    for (int i = 0; i < n; ++i) {
        double face = 1.0;
        for (int j = 0; j < n; ++j) {
            if (j != i) face *= ext[j];
        }
        surface += 2.0 * face;
    }
    return {static_cast<double>(inside) * std::pow(h, n), surface * h, false};
}

double equivalent_ball_radius(double volume, int n) {
    if (!(volume > 0.0) || !std::isfinite(volume)) throw ValidationError("equivalent_ball_radius: volume must be positive");
    if (n < 1) throw ValidationError("equivalent_ball_radius: dimension must be positive");
    return std::pow(volume / unit_ball_volume(n), 1.0 / n);
}

EquivalentBall equivalent_ball(const Domain& domain, const VolumeConfig& cfg) {
    const double v = volume(domain, cfg).value;
    return {equivalent_ball_radius(v, domain.dim()), Point::Zero(domain.dim()), domain.dim()};
}

double boundary_distance(const Domain& domain, const Point& x) {
    if (!contains(domain, x)) throw ValidationError("boundary_distance: point is outside the domain");
    switch (domain.kind()) {
        case DomainKind::ball: {
            const auto& b = domain.as<BallShape>();
            return b.radius - (x - b.center).norm();
        }
        case DomainKind::ellipse:
            // The bisection root is accurate to rounding; shave a relative 1e-12 so the ball stays inside.
            return ellipse_distance(domain.as<EllipseShape>(), x) * (1.0 - 1e-12);
        case DomainKind::rectangle: {
            const auto& r = domain.as<RectangleShape>();
            return std::min((x - r.lo).minCoeff(), (r.hi - x).minCoeff());
        }
        case DomainKind::polygon: {
            const auto& p = domain.as<PolygonShape>();
            return polygon_edge_distance(p.vertices, Eigen::Vector2d(x[0], x[1]));
        }
        case DomainKind::stadium: {
            const auto& s = domain.as<StadiumShape>();
            return s.radius - segment_distance(x, s.a, s.b);
        }
        case DomainKind::implicit: return implicit_distance(domain.as<ImplicitShape>(), x);
    }
    return 0.0;
}

Domain scale(const Domain& domain, double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("scale: factor must be positive");
    switch (domain.kind()) {
        case DomainKind::ball: {
            const auto& b = domain.as<BallShape>();
            return Domain::ball(r * b.center, r * b.radius);
        }
        case DomainKind::ellipse: {
            const auto& e = domain.as<EllipseShape>();
            return Domain::ellipse_axes(r * e.semi_x, r * e.semi_y, r * e.center);
        }
        case DomainKind::rectangle: {
            const auto& q = domain.as<RectangleShape>();
            return Domain::rectangle(r * q.lo, r * q.hi);
        }
        case DomainKind::polygon: {
            auto v = domain.as<PolygonShape>().vertices;
            for (auto& p : v) p *= r;
            return Domain::polygon(std::move(v));
        }
        case DomainKind::stadium: {
            const auto& s = domain.as<StadiumShape>();
            return Domain::stadium(r * s.a, r * s.b, r * s.radius);
        }
        case DomainKind::implicit: {
            const auto& s = domain.as<ImplicitShape>();
            std::optional<double> vol;
            if (domain.volume_hint()) vol = *domain.volume_hint() * std::pow(r, domain.dim());
            auto inside = s.inside;
            return Domain::implicit(
                domain.dim(), [inside, r](const Point& x) { return inside(x / r); }, r * s.lo, r * s.hi, vol,
                s.label);
        }
    }
    return domain;
}

Domain translate(const Domain& domain, const Point& shift) {
    require_dim(domain, shift);
    switch (domain.kind()) {
        case DomainKind::ball: {
            const auto& b = domain.as<BallShape>();
            return Domain::ball(b.center + shift, b.radius);
        }
        case DomainKind::ellipse: {
            const auto& e = domain.as<EllipseShape>();
            return Domain::ellipse_axes(e.semi_x, e.semi_y, e.center + Eigen::Vector2d(shift[0], shift[1]));
        }
        case DomainKind::rectangle: {
            const auto& q = domain.as<RectangleShape>();
            return Domain::rectangle(q.lo + shift, q.hi + shift);
        }
        case DomainKind::polygon: {
            auto v = domain.as<PolygonShape>().vertices;
            for (auto& p : v) p += Eigen::Vector2d(shift[0], shift[1]);
            return Domain::polygon(std::move(v));
        }
        case DomainKind::stadium: {
            const auto& s = domain.as<StadiumShape>();
            return Domain::stadium(s.a + shift, s.b + shift, s.radius);
        }
        case DomainKind::implicit: {
            const auto& s = domain.as<ImplicitShape>();
            auto inside = s.inside;
            return Domain::implicit(
                domain.dim(), [inside, shift](const Point& x) { return inside(x - shift); }, s.lo + shift,
                s.hi + shift, domain.volume_hint(), s.label);
        }
    }
    return domain;
}

double length_scale(const Domain& domain) { return domain.bounding_box().diameter(); }

}  // namespace torsionlab
