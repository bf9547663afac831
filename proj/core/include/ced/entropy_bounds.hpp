#pragma once

// Upper/lower Shannon entropy over a probability-interval credal set and the
// resulting total/aleatoric/epistemic decomposition. All values in nats.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ced/credal.hpp"

namespace ced {

enum class UncertaintyMeasure { credal_entropy, ensemble_mi, dirichlet, binary_interval, shannon };

std::string_view to_string(UncertaintyMeasure m);

struct UncertaintyTriple {
  double total = 0.0;
  double aleatoric = 0.0;
  double epistemic = 0.0;
  UncertaintyMeasure measure = UncertaintyMeasure::credal_entropy;
  // False when a bound came from the greedy heuristic rather than an exact
  // solve.
  bool exact = true;
};

/// Largest class count for which lower_entropy enumerates vertices exactly.
inline constexpr std::size_t kExactLowerEntropyMaxClasses = 12;

struct EntropyBound {
  double value = 0.0;
  std::vector<double> argument;  // distribution attaining the bound
  bool exact = true;
};

double shannon_entropy(std::span<const double> p);
inline double shannon_entropy(const ProbVector& p) { return shannon_entropy(p.values()); }

/// Maximum entropy over the credal set, by water-filling: p_k = clamp(c,
/// lower_k, upper_k) with the level c bisected until sum(p) = 1.
EntropyBound upper_entropy(const IntervalSystem& intervals);

/// Minimum entropy over the credal set. Attained at a vertex of the feasible
/// polytope; vertices are enumerated exactly for C <= 12, otherwise a greedy
/// mass-concentration heuristic is used and the result is flagged inexact.
EntropyBound lower_entropy(const IntervalSystem& intervals);

/// TU = upper entropy, AU = lower entropy, EU = TU - AU.
UncertaintyTriple decompose_uncertainty(const IntervalSystem& intervals);

struct BinaryIntervalUncertainty {
  double epistemic;
  double total;
};

/// Interval [lower, upper] on the positive-class probability:
/// EU = upper - lower, TU = min(1 - lower, upper).
BinaryIntervalUncertainty binary_interval_uncertainty(double lower, double upper);

/// Full triple for a two-class interval system using the binary measures on
/// class 1. The aleatoric slot holds TU - EU = min(lower, 1 - upper).
UncertaintyTriple binary_interval_triple(const IntervalSystem& intervals);

struct EntropyRange {
  double min;
  double max;
};

/// Exhaustive scan of a box-restricted simplex grid (test oracle).
///
/// For each choice of dependent coordinate d, every other coordinate runs over
/// lower_k, lower_k + step, ... plus upper_k itself; coordinate d takes the
/// remaining mass and the point is kept if it lies inside its own interval.
/// Requires C <= 4 and step in [1e-4, 0.05].
EntropyRange grid_oracle_entropy_bounds(const IntervalSystem& intervals, double step);

}  // namespace ced
