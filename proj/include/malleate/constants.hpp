#pragma once

#include <cstdint>

namespace malleate {

// A joint pmf must sum to 1 within this tolerance; inputs outside it are
// rejected rather than renormalized.
inline constexpr double kSumTolerance = 1e-9;

// Probabilities below this are treated as structural zeros when computing
// supports, conditional rows, and bipartite connectivity.
inline constexpr double kStructuralZero = 1e-12;

// Two conditional rows are considered equal (same sufficient-statistic cell)
// when they match within this sup-norm tolerance.
inline constexpr double kRowTolerance = 1e-9;

// Exhaustive partition search is refused above this support size; callers are
// pointed at the agglomerative heuristic instead.  Overridable per call.
inline constexpr int kDefaultExactSearchLimit = 12;

// Sequence enumeration is refused when the candidate space |alphabet|^n
// exceeds this.  Overridable per call.
inline constexpr std::uint64_t kDefaultEnumerationLimit = std::uint64_t{1} << 24;

// A point is reported as lying on the envelope when its l-value is within
// this of the envelope evaluated at its j-value.
inline constexpr double kEnvelopeTolerance = 1e-9;

}  // namespace malleate
