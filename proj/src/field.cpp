#include "torsionlab/field.hpp"

#include "torsionlab/errors.hpp"
#include "torsionlab/format.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace torsionlab {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::size_t GridSpec::cell_count() const {
    std::size_t count = 1;
    for (int i = 0; i < dim(); ++i) count *= static_cast<std::size_t>(extents[i]);
    return count;
}

double GridSpec::cell_volume() const { return std::pow(h, dim()); }

std::ptrdiff_t GridSpec::stride(int axis) const {
    std::ptrdiff_t s = 1;
    for (int i = 0; i < axis; ++i) s *= extents[i];
    return s;
}

Eigen::VectorXi GridSpec::multi_index(std::size_t index) const {
    Eigen::VectorXi m(dim());
    for (int i = 0; i < dim(); ++i) {
        m[i] = static_cast<int>(index % static_cast<std::size_t>(extents[i]));
        index /= static_cast<std::size_t>(extents[i]);
    }
    return m;
}

std::size_t GridSpec::linear_index(const Eigen::VectorXi& multi) const {
    std::size_t index = 0;
    for (int i = dim() - 1; i >= 0; --i) index = index * static_cast<std::size_t>(extents[i]) + multi[i];
    return index;
}

Point GridSpec::center(std::size_t index) const {
    Point x(dim());
    for (int i = 0; i < dim(); ++i) {
        const auto k = static_cast<double>(index % static_cast<std::size_t>(extents[i]));
        index /= static_cast<std::size_t>(extents[i]);
        x[i] = origin[i] + (k + 0.5) * h;
    }
    return x;
}

std::optional<std::size_t> GridSpec::locate(const Point& x) const {
    Eigen::VectorXi m(dim());
    for (int i = 0; i < dim(); ++i) {
        const double k = std::floor((x[i] - origin[i]) / h);
        if (k < 0.0 || k >= extents[i]) return std::nullopt;
        m[i] = static_cast<int>(k);
    }
    return linear_index(m);
}

GridSpec grid_for(const Domain& domain, int resolution) {
    if (resolution < 1) throw ValidationError("grid resolution must be positive");
    const Box box = domain.bounding_box();
    const Point ext = box.extent();
    const int n = domain.dim();
    GridSpec g;
    g.h = ext.maxCoeff() / resolution;
    g.extents.resize(n);
    for (int i = 0; i < n; ++i) {
        int c = std::max(1, static_cast<int>(std::ceil(ext[i] / g.h - 1e-9)));
        if (c % 2 == 0) ++c;
        g.extents[i] = c + 2;
    }
    g.origin = box.center() - 0.5 * g.h * g.extents.cast<double>();
    return g;
}

double ScalarField::max_value() const { return values.size() == 0 ? 0.0 : values.maxCoeff(); }

std::size_t ScalarField::masked_count() const {
    std::size_t c = 0;
    for (auto m : mask) c += m ? 1 : 0;
    return c;
}

double ScalarField::masked_volume() const { return static_cast<double>(masked_count()) * grid.cell_volume(); }

double ScalarField::value_at(const Point& x) const {
    const int n = dim();
    if (x.size() != n) throw ValidationError("value_at: dimension mismatch");
    Eigen::VectorXi base(n);
    Eigen::VectorXd frac(n);
    for (int i = 0; i < n; ++i) {
        const double s = (x[i] - grid.origin[i]) / grid.h - 0.5;
        const double f = std::floor(s);
        base[i] = static_cast<int>(f);
        frac[i] = s - f;
    }
    double total = 0.0;
    const int corners = 1 << n;
    Eigen::VectorXi m(n);
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        bool valid = true;
        for (int i = 0; i < n; ++i) {
            const int bit = (c >> i) & 1;
            m[i] = base[i] + bit;
            w *= bit ? frac[i] : 1.0 - frac[i];
            if (m[i] < 0 || m[i] >= grid.extents[i]) valid = false;
        }
        if (valid && w != 0.0) total += w * values[static_cast<Eigen::Index>(grid.linear_index(m))];
    }
    return total;
}

void ScalarField::validate() const {
    if (static_cast<std::size_t>(values.size()) != grid.cell_count() || mask.size() != grid.cell_count()) {
        throw ValidationError("field: storage does not match grid");
    }
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double v = values[static_cast<Eigen::Index>(i)];
        if (!std::isfinite(v)) throw ValidationError("field: non-finite value");
        if (v < 0.0) throw ValidationError("field: negative value");
        if (!mask[i] && v != 0.0) throw ValidationError("field: non-zero value outside the mask");
    }
}

std::vector<std::uint8_t> domain_mask(const Domain& domain, const GridSpec& grid) {
    if (grid.dim() != domain.dim()) throw ValidationError("domain_mask: dimension mismatch");
    std::vector<std::uint8_t> mask(grid.cell_count());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = contains(domain, grid.center(i)) ? 1 : 0;
    return mask;
}

ScalarField sample_field(const Domain& domain, const GridSpec& grid, const std::function<double(const Point&)>& fn) {
    ScalarField f{grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.cell_count())), domain_mask(domain, grid)};
    for (std::size_t i = 0; i < f.mask.size(); ++i) {
        if (f.mask[i]) f.values[static_cast<Eigen::Index>(i)] = fn(grid.center(i));
    }
    return f;
}

ScalarField scaled(const ScalarField& field, double c) {
    ScalarField out = field;
    out.values *= c;
    return out;
}

namespace {

nlohmann::json grid_header(const GridSpec& g) {
    nlohmann::json head;
    head["n"] = g.dim();
    head["h"] = g.h;
    head["origin"] = std::vector<double>(g.origin.data(), g.origin.data() + g.origin.size());
    head["extents"] = std::vector<int>(g.extents.data(), g.extents.data() + g.extents.size());
    return head;
}

GridSpec grid_from_header(const nlohmann::json& head) {
    GridSpec g;
    try {
        const int n = head.at("n").get<int>();
        g.h = head.at("h").get<double>();
        const auto origin = head.at("origin").get<std::vector<double>>();
        const auto extents = head.at("extents").get<std::vector<int>>();
        if (n < 1 || static_cast<int>(origin.size()) != n || static_cast<int>(extents.size()) != n || !(g.h > 0.0)) {
            throw ParseError("field header: inconsistent grid description");
        }
        g.origin = Eigen::Map<const Eigen::VectorXd>(origin.data(), n);
        g.extents = Eigen::Map<const Eigen::VectorXi>(extents.data(), n);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("field header: ") + e.what());
    }
    return g;
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ParseError("field: malformed number '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

void write_field_csv(std::ostream& out, const ScalarField& field) {
    field.validate();
    const int n = field.dim();
    out << "# grid " << grid_header(field.grid).dump() << "\n";
    for (int i = 0; i < n; ++i) out << 'x' << i << ',';
    out << "value,inside\n";
    for (std::size_t c = 0; c < field.size(); ++c) {
        const Point x = field.grid.center(c);
        for (int i = 0; i < n; ++i) out << format_double(x[i]) << ',';
        out << format_double(field.values[static_cast<Eigen::Index>(c)]) << ',' << (field.mask[c] ? 1 : 0) << '\n';
    }
}

ScalarField read_field_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# grid ", 0) != 0) throw ParseError("field csv: missing grid line");
    ScalarField f;
    try {
        f.grid = grid_from_header(nlohmann::json::parse(line.substr(7)));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("field csv: ") + e.what());
    }
    if (!std::getline(in, line)) throw ParseError("field csv: missing column header");
    const std::size_t count = f.grid.cell_count();
    const int n = f.grid.dim();
    f.values.resize(static_cast<Eigen::Index>(count));
    f.mask.resize(count);
    for (std::size_t c = 0; c < count; ++c) {
        if (!std::getline(in, line)) throw ParseError("field csv: truncated at row " + std::to_string(c));
        std::vector<std::string_view> cols;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            cols.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (static_cast<int>(cols.size()) != n + 2) throw ParseError("field csv: wrong column count at row " + std::to_string(c));
        f.values[static_cast<Eigen::Index>(c)] = parse_double(cols[static_cast<std::size_t>(n)]);
        f.mask[c] = cols[static_cast<std::size_t>(n) + 1] == "1" ? 1 : 0;
    }
    f.validate();
    return f;
}

void write_field_stream(std::ostream& out, const ScalarField& field) {
    field.validate();
    nlohmann::json head = grid_header(field.grid);
    head["format"] = "torsionlab-field";
    head["version"] = 1;
    out << head.dump() << '\n';
    for (std::size_t c = 0; c < field.size(); ++c) {
        if (c) out << ' ';
        out << format_double(field.values[static_cast<Eigen::Index>(c)]);
    }
    out << '\n';
    for (auto m : field.mask) out << (m ? '1' : '0');
    out << '\n';
}

ScalarField read_field_stream(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("field stream: missing header");
    nlohmann::json head;
    try {
        head = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("field stream: ") + e.what());
    }
    if (head.value("format", "") != "torsionlab-field") throw ParseError("field stream: field 'format' is not torsionlab-field");
    ScalarField f;
    f.grid = grid_from_header(head);
    const std::size_t count = f.grid.cell_count();
    f.values.resize(static_cast<Eigen::Index>(count));
    if (!std::getline(in, line)) throw ParseError("field stream: missing values");
    std::istringstream values(line);
    std::string token;
    for (std::size_t c = 0; c < count; ++c) {
        if (!(values >> token)) throw ParseError("field stream: truncated values");
        f.values[static_cast<Eigen::Index>(c)] = parse_double(token);
    }
    if (!std::getline(in, line) || line.size() != count) throw ParseError("field stream: mask length mismatch");
    f.mask.resize(count);
    for (std::size_t c = 0; c < count; ++c) f.mask[c] = line[c] == '1' ? 1 : 0;
    f.validate();
    return f;
}

}  // namespace torsionlab
