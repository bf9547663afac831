#pragma once

// Random generators and finite-difference helpers shared by the unit tests
// and the acceptance runner.

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ced/credal.hpp"
#include "ced/mlp.hpp"
#include "ced/trainer.hpp"
#include "ced/types.hpp"

namespace ced::testing {

using Rng = std::mt19937_64;

/// Uniform draw from the simplex (flat Dirichlet). Occasionally returns a
/// one-hot or sparse vector so degenerate corners get exercised.
std::vector<double> random_simplex(Rng& rng, std::size_t classes);

/// M member distributions, one per entry.
std::vector<std::vector<double>> random_ensemble(Rng& rng, std::size_t members,
                                                 std::size_t classes);

/// Valid interval system obtained by wrapping 1..max_members random members.
IntervalSystem random_intervals(Rng& rng, std::size_t classes, std::size_t max_members = 6);

/// Widens every interval by a random amount, staying valid.
IntervalSystem enlarge(Rng& rng, const IntervalSystem& s);

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale);

/// Runs wrap -> intersection -> reconstruct on one ensemble and returns a
/// description of every violated credal invariant (empty when all hold).
std::vector<std::string> credal_violations(const std::vector<std::vector<double>>& members);

/// Containment and width checks for the intervals rebuilt from an arbitrary
/// prediction.
std::vector<std::string> reconstruction_violations(const CredalPrediction& pred);

/// Central differences of f at x with step h.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h = 1e-5);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor).
double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                          double floor = 1e-6);

using BatchLoss = ad::Var (*)(ad::Var, const TeacherLogits&, std::span<const std::size_t>,
                              double);

/// Random teacher: `members` tables of N x C logits.
TeacherLogits random_teacher(Rng& rng, std::size_t members, std::size_t samples,
                             std::size_t classes, double scale);

/// Max relative error between the reverse-mode gradient of `loss` with
/// respect to the student logits and central differences.
double logit_gradient_error(BatchLoss loss, const TeacherLogits& teacher, const Matrix& logits,
                            double temperature, double h = 1e-5);

/// Same check for every parameter of `net` on a forward pass over `inputs`.
double parameter_gradient_error(BatchLoss loss, const TeacherLogits& teacher, Mlp& net,
                                const Matrix& inputs, double temperature, double h = 1e-5);

}  // namespace ced::testing
