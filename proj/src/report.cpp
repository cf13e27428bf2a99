#include "torsionlab/report.hpp"

#include "torsionlab/errors.hpp"
#include "torsionlab/format.hpp"

#include <fstream>
#include <map>

namespace torsionlab {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const std::string& suffix) {
    return stem.parent_path() / (stem.filename().string() + suffix);
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    if (!out.flush()) throw ValidationError("cannot write " + path.string());
}

std::string series_name(const Certificate& c) {
    std::string name = "thm" + c.theorem;
    for (const auto& [k, v] : c.params) {
        if (k != "p" && k != "alpha") continue;
        name += "_" + k + (std::isinf(v) ? std::string("inf") : format_double(v));
    }
    return name;
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    if (name == "svg-data") return ReportFormat::svg_data;
    throw ValidationError("unknown report format '" + name + "'");
}

void write_polyline(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y) {
    out << "# x y\n";
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) out << format_double(x[i]) << ' ' << format_double(y[i]) << '\n';
}

std::vector<std::filesystem::path> write_certificates(const std::vector<Certificate>& certs, ReportFormat format,
                                                      const std::filesystem::path& stem, const std::vector<double>& eps) {
    if (certs.empty()) throw ValidationError("report: no certificates to write");
    std::vector<std::filesystem::path> written;
    auto write_csv = [&] {
        const auto path = with_suffix(stem, ".csv");
        auto out = open_out(path);
        out << certificate_csv_header() << '\n';
        for (const auto& c : certs) out << certificate_csv_row(c) << '\n';
        finish(out, path);
        written.push_back(path);
    };
    switch (format) {
        case ReportFormat::csv:
            write_csv();
            break;
        case ReportFormat::json: {
            nlohmann::json doc = nlohmann::json::array();
            for (const auto& c : certs) doc.push_back(c.to_json());
            written.push_back(write_json_report(certs.size() == 1 ? doc[0] : doc, stem));
            write_csv();
            break;
        }
        case ReportFormat::svg_data: {
            if (eps.empty() || certs.size() % eps.size() != 0)
                throw ValidationError("report: svg-data needs one block of certificates per shape parameter");
            const std::size_t per = certs.size() / eps.size();
            std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
            std::vector<std::string> order;
            for (std::size_t i = 0; i < certs.size(); ++i) {
                const std::string name = series_name(certs[i]);
                if (!series.count(name)) order.push_back(name);
                auto& s = series[name];
                s.first.push_back(eps[i / per]);
                s.second.push_back(certs[i].lhs);
            }
            for (const auto& name : order) {
                const auto path = with_suffix(stem, "." + name + ".dat");
                auto out = open_out(path);
                write_polyline(out, series[name].first, series[name].second);
                finish(out, path);
                written.push_back(path);
            }
            break;
        }
    }
    return written;
}

std::filesystem::path write_json_report(const nlohmann::json& doc, const std::filesystem::path& stem) {
    const auto path = with_suffix(stem, ".json");
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    finish(out, path);
    return path;
}

std::vector<std::filesystem::path> write_field_report(const ScalarField& field, const DistributionFunction& mu,
                                                      ReportFormat format, const std::filesystem::path& stem) {
    std::vector<std::filesystem::path> written;
    switch (format) {
        case ReportFormat::csv: {
            const auto path = with_suffix(stem, ".csv");
            auto out = open_out(path);
            write_field_csv(out, field);
            finish(out, path);
            written.push_back(path);
            break;
        }
        case ReportFormat::json: {
            nlohmann::json doc;
            doc["max"] = field.max_value();
            doc["volume"] = field.masked_volume();
            doc["h"] = field.grid.h;
            doc["distribution"] = {{"t", mu.t}, {"mu", mu.mu}};
            written.push_back(write_json_report(doc, stem));
            break;
        }
        case ReportFormat::svg_data: {
            const auto path = with_suffix(stem, ".mu.dat");
            auto out = open_out(path);
            write_polyline(out, mu.t, mu.mu);
            finish(out, path);
            written.push_back(path);
            break;
        }
    }
    return written;
}

}  // namespace torsionlab
