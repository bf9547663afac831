#pragma once

// Teacher/student forward transforms and per-sample losses for deep
// ensembles (DE), ensemble distillation (ED), ensemble distribution
// distillation (EDD) and credal ensemble distillation (CED).

#include <cstddef>
#include <span>
#include <vector>

#include "ced/credal.hpp"
#include "ced/entropy_bounds.hpp"

namespace ced {

/// Clamp applied inside every logarithm of a predicted probability.
inline constexpr double kLogClamp = 1e-12;

/// Logits above this value overflow exp() in double precision.
inline constexpr double kExpOverflowLogit = 709.0;

std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);
double sigmoid(double z);

// ---- deep ensembles -------------------------------------------------------

ProbVector de_average(std::span<const std::vector<double>> member_probs);

/// TU = H(mean), AU = mean of member entropies, EU = TU - AU.
UncertaintyTriple de_uncertainty(std::span<const std::vector<double>> member_probs);

// ---- ensemble distillation ------------------------------------------------

/// -sum_k teacher_k * ln(max(student_k, kLogClamp)).
double ed_loss(const ProbVector& teacher_soft, const ProbVector& student_p);

// ---- CREDIT ---------------------------------------------------------------

/// Raw 2C+1 logits of a CREDIT head with the temperature used for the first
/// C entries.
class StudentLogits {
 public:
  StudentLogits(std::vector<double> z, std::size_t class_count, double temperature = 1.0);

  std::span<const double> z() const { return z_; }
  std::size_t class_count() const { return classes_; }
  double temperature() const { return temperature_; }

 private:
  std::vector<double> z_;
  std::size_t classes_;
  double temperature_;
};

/// p* = softmax(z[0:C] / T), delta = sigmoid(z[C:2C]), beta = sigmoid(z[2C]).
/// Only the first C logits see the temperature.
CredalPrediction credit_forward(const StudentLogits& logits);

/// -sum p*_k ln p*_S,k + sum (delta_k - delta_S,k)^2 + (beta - beta_S)^2.
double ced_loss(const CredalPrediction& teacher, const CredalPrediction& student);

// ---- EDD ------------------------------------------------------------------

class DirichletPrediction {
 public:
  explicit DirichletPrediction(std::vector<double> alpha);

  const std::vector<double>& alpha() const { return alpha_; }
  const ProbVector& pi() const { return pi_; }
  double alpha0() const { return alpha0_; }
  std::size_t size() const { return alpha_.size(); }

 private:
  std::vector<double> alpha_;
  ProbVector pi_;
  double alpha0_;
};

/// alpha = exp(z), pi = softmax(z). Throws InputError above kExpOverflowLogit.
DirichletPrediction edd_forward(std::span<const double> logits);

/// TU = H(pi), AU = expected categorical entropy under Dir(alpha).
UncertaintyTriple edd_uncertainty(const DirichletPrediction& pred);

/// Negative Dirichlet log-likelihood of the member distributions (single
/// sample). Member probabilities are clamped at kLogClamp.
double edd_loss(const DirichletPrediction& pred,
                std::span<const std::vector<double>> member_probs);

}  // namespace ced
