#pragma once

// Probability-interval credal sets: construction from ensemble members,
// the intersection probability, and reconstruction from student outputs.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ced/types.hpp"

namespace ced {

/// Tolerance used when accepting probability vectors and interval systems.
inline constexpr double kProbTolerance = 1e-9;

/// A normalized distribution over C >= 2 classes.
///
/// Inputs whose sum is within kProbTolerance of one are renormalized exactly
/// (divided by their sum); anything further off is rejected with InputError.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> values);
  ProbVector(std::initializer_list<double> values)
      : ProbVector(std::vector<double>(values)) {}

  static ProbVector uniform(std::size_t classes);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }

  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> values_;
};

/// Per-class bounds [lower_k, upper_k]. May hold invalid data; use
/// check_validity() before trusting it.
struct IntervalSystem {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
  std::vector<double> widths() const;

  friend bool operator==(const IntervalSystem&, const IntervalSystem&) = default;
};

struct Validity {
  bool valid = true;
  std::vector<std::string> violations;

  explicit operator bool() const { return valid; }
};

/// Checks 0 <= lower_k <= upper_k <= 1 and sum(lower) <= 1 <= sum(upper),
/// all within kProbTolerance. Every violated constraint is listed.
Validity check_validity(const IntervalSystem& intervals);

/// Throws InputError carrying the diagnostics if the system is not valid.
void require_valid(const IntervalSystem& intervals, const char* context);

/// CREDIT output triple (p*, delta, beta).
class CredalPrediction {
 public:
  CredalPrediction(ProbVector p_star, std::vector<double> delta, double beta);

  const ProbVector& p_star() const { return p_star_; }
  const std::vector<double>& delta() const { return delta_; }
  double beta() const { return beta_; }
  std::size_t size() const { return p_star_.size(); }

 private:
  ProbVector p_star_;
  std::vector<double> delta_;
  double beta_;
};

/// Elementwise min/max over M member distributions (one per row).
IntervalSystem wrap_ensemble(std::span<const std::vector<double>> member_probs);
IntervalSystem wrap_ensemble(const Matrix& member_probs);

struct IntersectionProbability {
  ProbVector p_star;
  double beta;
};

/// p*_k = lower_k + beta * (upper_k - lower_k) with
/// beta = (1 - sum lower) / sum(widths), clamped to [0, 1]. When every
/// interval has zero width beta is defined as 0.5.
IntersectionProbability intersection_probability(const IntervalSystem& intervals);

/// The teacher label (p*, delta, beta) for an interval system.
CredalPrediction credal_label(const IntervalSystem& intervals);

/// lower_k = max(p*_k - beta * delta_k, 0), upper_k = min(p*_k + (1 - beta) * delta_k, 1).
IntervalSystem reconstruct_intervals(const CredalPrediction& pred);

/// Index of the largest probability; ties go to the lowest index.
std::size_t predict_class(const ProbVector& p);
std::size_t predict_class(std::span<const double> p);

}  // namespace ced
