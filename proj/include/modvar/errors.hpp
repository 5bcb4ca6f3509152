#pragma once

#include <stdexcept>
#include <string>

namespace modvar {

// Base for all library errors so callers can catch one type at the boundary.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lattice/grid contract violations (non-lattice displacement, incompatible period).
struct GridError : Error { using Error::Error; };

// Two-lump construction with intersecting lump windows.
struct OverlapError : Error { using Error::Error; };

// Moment order outside the numeric guard (m or n > 8).
struct OrderOverflowError : Error { using Error::Error; };

// Split-step evolution guard violation (dt too large for V or the momentum window).
struct StabilityError : Error { using Error::Error; };

// Operator handed to a spectral routine is not Hermitian within tolerance,
// or its eigendecomposition failed to reconstruct it.
struct SpectrumError : Error { using Error::Error; };

// Pre- and post-selected states orthogonal: weak value undefined.
struct OrthogonalError : Error { using Error::Error; };

// Requested the orthogonal component of an eigenstate decomposition
// (spread is zero, so no direction exists).
struct DegenerateError : Error { using Error::Error; };

// Collective coupling requires operator norm <= 1.
struct NormBoundError : Error { using Error::Error; };

// Momentum bookkeeping handed to ellipse_check violates P1+P2 = P1'+P2'.
struct ConservationError : Error { using Error::Error; };

// Optical chain failed its unitarity self-check.
struct ConventionError : Error { using Error::Error; };

// Manifest text is not well-formed.
struct ParseError : Error { using Error::Error; };

// Manifest is well-formed but violates the schema (unknown keys, bad values).
struct ValidationError : Error { using Error::Error; };

}  // namespace modvar
