#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace torsionlab {

using Point = Eigen::VectorXd;

enum class DomainKind { ball, ellipse, rectangle, polygon, stadium, implicit };

std::string_view to_string(DomainKind kind);

struct BallShape {
    Point center;
    double radius;
};

/// Axis-aligned ellipse in the plane. The family D_ε of the torsion examples
/// has semi_x = 1 and semi_y = 1 + ε.
struct EllipseShape {
    Eigen::Vector2d center;
    double semi_x;
    double semi_y;
};

struct RectangleShape {
    Point lo;
    Point hi;
};

/// Simple polygon, vertices in order (either orientation), not repeated.
struct PolygonShape {
    std::vector<Eigen::Vector2d> vertices;
};

/// Capsule: points within `radius` of the segment [a, b].
struct StadiumShape {
    Point a;
    Point b;
    double radius;
};

struct ImplicitShape {
    std::function<bool(const Point&)> inside;
    Point lo;
    Point hi;
    std::string label;
};

struct Box {
    Point lo;
    Point hi;

    [[nodiscard]] double diameter() const { return (hi - lo).norm(); }
    [[nodiscard]] Point center() const { return 0.5 * (lo + hi); }
    [[nodiscard]] Point extent() const { return hi - lo; }
};

/// Bounded open region of R^n. Immutable; every query is a free function.
class Domain {
public:
    using Shape = std::variant<BallShape, EllipseShape, RectangleShape, PolygonShape, StadiumShape, ImplicitShape>;

    static Domain ball(Point center, double radius);
    static Domain disk(double radius);
    /// Ellipse with semi-axes (1, 1 + eps) centred at the origin.
    static Domain ellipse(double eps);
    static Domain ellipse_axes(double semi_x, double semi_y, Eigen::Vector2d center = Eigen::Vector2d::Zero());
    static Domain rectangle(Point lo, Point hi);
    static Domain unit_square();
    static Domain polygon(std::vector<Eigen::Vector2d> vertices);
    static Domain stadium(Point a, Point b, double radius);
    static Domain implicit(int n, std::function<bool(const Point&)> inside, Point lo, Point hi,
                           std::optional<double> volume_hint = std::nullopt, std::string label = "implicit");

    [[nodiscard]] DomainKind kind() const;
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] const Shape& shape() const { return shape_; }
    /// Exact volume when known in closed form.
    [[nodiscard]] const std::optional<double>& volume_hint() const { return volume_hint_; }
    [[nodiscard]] Box bounding_box() const { return box_; }
    /// True for balls and for ellipses with equal semi-axes.
    [[nodiscard]] bool is_ball() const;

    template <typename T>
    [[nodiscard]] const T& as() const {
        return std::get<T>(shape_);
    }

private:
    Domain(Shape shape, int dim, Box box, std::optional<double> volume_hint);

    Shape shape_;
    int dim_;
    Box box_;
    std::optional<double> volume_hint_;
};

[[nodiscard]] bool contains(const Domain& domain, const Point& x);

/// Points not in the open domain but within `tol` of it along some axis.
[[nodiscard]] bool on_boundary(const Domain& domain, const Point& x, double tol = 1e-9);

struct VolumeConfig {
    int resolution = 1024;  ///< cells along the longest bounding-box side
};

struct VolumeEstimate {
    double value;
    double error;  ///< zero for closed forms
    bool exact;
};

[[nodiscard]] VolumeEstimate volume(const Domain& domain, const VolumeConfig& cfg = {});

/// Radius r with ω_n r^n = v.
[[nodiscard]] double equivalent_ball_radius(double volume, int n);

struct EquivalentBall {
    double radius;
    Point center;
    int n;
};

[[nodiscard]] EquivalentBall equivalent_ball(const Domain& domain, const VolumeConfig& cfg = {});

/// Positive lower bound on dist(x, ∂D), at least half the true distance.
/// Exact for ball, ellipse, rectangle, polygon and stadium.
[[nodiscard]] double boundary_distance(const Domain& domain, const Point& x);

/// rD = {r y : y ∈ D}.
[[nodiscard]] Domain scale(const Domain& domain, double r);
[[nodiscard]] Domain translate(const Domain& domain, const Point& shift);

/// Diameter of the bounding box; the length scale used for tolerances.
[[nodiscard]] double length_scale(const Domain& domain);

}  // namespace torsionlab
