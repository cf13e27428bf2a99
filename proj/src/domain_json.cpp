#include "torsionlab/domain_json.hpp"

#include "torsionlab/errors.hpp"

#include <set>

namespace torsionlab {

using nlohmann::json;

namespace {

double number_field(const json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(std::string("missing field '") + key + "'");
    if (!it->is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

Point point_value(const json& value, const std::string& key) {
    if (!value.is_array() || value.empty()) throw ParseError("field '" + key + "' must be a non-empty array of numbers");
    Point p(static_cast<Eigen::Index>(value.size()));
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_number()) throw ParseError("field '" + key + "' must contain only numbers");
        p[static_cast<Eigen::Index>(i)] = value[i].get<double>();
    }
    return p;
}

json point_json(const Point& p) {
    json a = json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
    return a;
}

void check_keys(const json& doc, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : doc.items()) {
        if (!allowed.contains(key)) throw ParseError("unexpected field '" + key + "'");
    }
}

void check_dim(const json& doc, int actual) {
    if (!doc.contains("n")) return;
    if (doc["n"].get<int>() != actual) {
        throw ParseError("field 'n' is " + std::to_string(doc["n"].get<int>()) + " but the geometry has dimension " +
                         std::to_string(actual));
    }
}

}  // namespace

Domain domain_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("domain document must be a JSON object");
    const auto kind_it = doc.find("kind");
    if (kind_it == doc.end()) throw ParseError("missing field 'kind'");
    if (!kind_it->is_string()) throw ParseError("field 'kind' must be a string");
    const std::string kind = kind_it->get<std::string>();

    int n = 2;
    if (doc.contains("n")) {
        if (!doc["n"].is_number_integer()) throw ParseError("field 'n' must be an integer");
        n = doc["n"].get<int>();
        if (n < 1) throw ValidationError("field 'n' must be at least 1");
    }

    if (kind == "ball") {
        check_keys(doc, {"kind", "n", "radius", "center"});
        const double radius = number_field(doc, "radius");
        Point center = doc.contains("center") ? point_value(doc["center"], "center") : Point::Zero(n);
        check_dim(doc, static_cast<int>(center.size()));
        return Domain::ball(std::move(center), radius);
    }
    if (kind == "ellipse") {
        check_keys(doc, {"kind", "n", "eps", "semi_axes", "center"});
        if (n != 2) throw ValidationError("ellipse domains are two-dimensional");
        Eigen::Vector2d center = Eigen::Vector2d::Zero();
        if (doc.contains("center")) {
            const Point c = point_value(doc["center"], "center");
            if (c.size() != 2) throw ParseError("field 'center' must have 2 coordinates");
            center = Eigen::Vector2d(c[0], c[1]);
        }
        if (doc.contains("semi_axes")) {
            if (doc.contains("eps")) throw ParseError("fields 'eps' and 'semi_axes' are mutually exclusive");
            const Point ax = point_value(doc["semi_axes"], "semi_axes");
            if (ax.size() != 2) throw ParseError("field 'semi_axes' must have 2 entries");
            return Domain::ellipse_axes(ax[0], ax[1], center);
        }
        const double eps = number_field(doc, "eps");
        if (!(eps >= 0.0)) throw ValidationError("field 'eps' must be non-negative");
        return Domain::ellipse_axes(1.0, 1.0 + eps, center);
    }
    if (kind == "rectangle") {
        check_keys(doc, {"kind", "n", "corners"});
        if (!doc.contains("corners")) throw ParseError("missing field 'corners'");
        const json& c = doc["corners"];
        if (!c.is_array() || c.size() != 2) throw ParseError("field 'corners' must hold two points");
        Point lo = point_value(c[0], "corners");
        Point hi = point_value(c[1], "corners");
        check_dim(doc, static_cast<int>(lo.size()));
        return Domain::rectangle(std::move(lo), std::move(hi));
    }
    if (kind == "polygon") {
        check_keys(doc, {"kind", "n", "vertices"});
        if (n != 2) throw ValidationError("polygon domains are two-dimensional");
        if (!doc.contains("vertices")) throw ParseError("missing field 'vertices'");
        const json& v = doc["vertices"];
        if (!v.is_array()) throw ParseError("field 'vertices' must be an array of points");
        std::vector<Eigen::Vector2d> vertices;
        for (const auto& item : v) {
            const Point p = point_value(item, "vertices");
            if (p.size() != 2) throw ParseError("field 'vertices' must contain 2D points");
            vertices.emplace_back(p[0], p[1]);
        }
        return Domain::polygon(std::move(vertices));
    }
    if (kind == "stadium") {
        check_keys(doc, {"kind", "n", "capsule"});
        if (!doc.contains("capsule")) throw ParseError("missing field 'capsule'");
        const json& c = doc["capsule"];
        if (!c.is_object()) throw ParseError("field 'capsule' must be an object");
        check_keys(c, {"a", "b", "radius"});
        if (!c.contains("a")) throw ParseError("missing field 'capsule.a'");
        if (!c.contains("b")) throw ParseError("missing field 'capsule.b'");
        Point a = point_value(c["a"], "capsule.a");
        Point b = point_value(c["b"], "capsule.b");
        check_dim(doc, static_cast<int>(a.size()));
        return Domain::stadium(std::move(a), std::move(b), number_field(c, "radius"));
    }
    if (kind == "implicit") throw ParseError("field 'kind': implicit domains need a predicate and cannot be read from JSON");
    throw ParseError("field 'kind': unknown domain kind '" + kind + "'");
}

Domain parse_domain_spec(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    try {
        return domain_from_json(doc);
    } catch (const json::type_error& e) {
        throw ParseError(std::string("schema violation: ") + e.what());
    }
}

json domain_to_json(const Domain& domain) {
    json doc;
    doc["kind"] = std::string(to_string(domain.kind()));
    doc["n"] = domain.dim();
    switch (domain.kind()) {
        case DomainKind::ball: {
            const auto& b = domain.as<BallShape>();
            doc["radius"] = b.radius;
            doc["center"] = point_json(b.center);
            break;
        }
        case DomainKind::ellipse: {
            const auto& e = domain.as<EllipseShape>();
            doc["semi_axes"] = json::array({e.semi_x, e.semi_y});
            doc["center"] = json::array({e.center.x(), e.center.y()});
            break;
        }
        case DomainKind::rectangle: {
            const auto& r = domain.as<RectangleShape>();
            doc["corners"] = json::array({point_json(r.lo), point_json(r.hi)});
            break;
        }
        case DomainKind::polygon: {
            json v = json::array();
            for (const auto& p : domain.as<PolygonShape>().vertices) v.push_back(json::array({p.x(), p.y()}));
            doc["vertices"] = std::move(v);
            break;
        }
        case DomainKind::stadium: {
            const auto& s = domain.as<StadiumShape>();
            doc["capsule"] = {{"a", point_json(s.a)}, {"b", point_json(s.b)}, {"radius", s.radius}};
            break;
        }
        case DomainKind::implicit: {
            const auto& s = domain.as<ImplicitShape>();
            doc["label"] = s.label;
            doc["bbox"] = json::array({point_json(s.lo), point_json(s.hi)});
            break;
        }
    }
    return doc;
}

std::string canonical_json(const json& doc) { return doc.dump(); }

}  // namespace torsionlab
