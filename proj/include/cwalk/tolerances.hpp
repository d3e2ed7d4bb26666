#pragma once

namespace cwalk {

// Algebraic identities (normalization, unitarity, exact expansions).
inline constexpr double kAlgebraicTol = 1e-12;

// Absorption detection in collapse walks.
inline constexpr double kAbsorbTol = 1e-9;

// Default sigma multiplier for statistical acceptance bands.
inline constexpr double kSigmaFactor = 4.0;

}  // namespace cwalk
