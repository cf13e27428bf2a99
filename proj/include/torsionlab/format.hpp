#pragma once

#include <string>

namespace torsionlab {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace torsionlab
