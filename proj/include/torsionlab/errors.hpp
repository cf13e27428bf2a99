#pragma once

#include <stdexcept>
#include <string>

namespace torsionlab {

/// Base of every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid input: bad parameters, malformed documents, points outside a domain.
/// The CLI maps these to exit status 2.
struct ValidationError : Error {
    using Error::Error;
};

/// Malformed domain document; the message names the offending field.
struct ParseError : ValidationError {
    using ValidationError::ValidationError;
};

/// A numerical procedure failed (no interior cells, CG stagnation, ...).
/// The CLI maps these to exit status 3.
struct SolverError : Error {
    using Error::Error;
};

}  // namespace torsionlab
