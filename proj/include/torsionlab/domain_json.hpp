#pragma once

#include "torsionlab/geometry.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace torsionlab {

/// Parses a domain document:
///   {"kind": "ball"|"ellipse"|"rectangle"|"polygon"|"stadium", "n": int,
///    "radius": r, "center": [..], "eps": e, "semi_axes": [a, b],
///    "corners": [[lo..], [hi..]], "vertices": [[x, y], ...],
///    "capsule": {"a": [..], "b": [..], "radius": r}}
[[nodiscard]] Domain parse_domain_spec(std::string_view text);
[[nodiscard]] Domain domain_from_json(const nlohmann::json& doc);

/// Canonical description of a domain (implicit domains carry only their label).
[[nodiscard]] nlohmann::json domain_to_json(const Domain& domain);

/// Sorted keys, shortest round-trip numbers, no whitespace.
[[nodiscard]] std::string canonical_json(const nlohmann::json& doc);

}  // namespace torsionlab
