#pragma once

#include "torsionlab/certify.hpp"
#include "torsionlab/field.hpp"
#include "torsionlab/levels.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace torsionlab {

enum class ReportFormat { csv, json, svg_data };

[[nodiscard]] ReportFormat parse_report_format(const std::string& name);

/// Writes `stem.csv` (csv), `stem.json` plus `stem.csv` (json), or one polyline
/// file per (theorem, parameter) series (svg-data). Returns the files written.
std::vector<std::filesystem::path> write_certificates(const std::vector<Certificate>& certs, ReportFormat format,
                                                      const std::filesystem::path& stem,
                                                      const std::vector<double>& eps = {});

/// Field reports: the field itself (csv), a summary with the distribution
/// function (json), or the t–μ polyline (svg-data).
std::vector<std::filesystem::path> write_field_report(const ScalarField& field, const DistributionFunction& mu,
                                                      ReportFormat format, const std::filesystem::path& stem);

/// Writes `stem.json`.
std::filesystem::path write_json_report(const nlohmann::json& doc, const std::filesystem::path& stem);

/// `# x y` header then one point per line.
void write_polyline(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y);

}  // namespace torsionlab
