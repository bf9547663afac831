#include "ced/heads.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ced/numeric.hpp"
#include "ced/special_functions.hpp"

namespace ced {

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (logits.empty()) throw InputError("softmax: empty logits");
  if (!(temperature > 0.0)) throw InputError("softmax: temperature must be > 0");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp((logits[k] - top) / temperature);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

std::vector<ProbVector> validate_members(std::span<const std::vector<double>> member_probs,
                                         const char* context) {
  if (member_probs.empty()) throw InputError(std::string(context) + ": no members");
  std::vector<ProbVector> out;
  out.reserve(member_probs.size());
  for (const auto& row : member_probs) {
    if (row.size() != member_probs.front().size()) {
      throw InputError(std::string(context) + ": ragged member rows");
    }
    out.emplace_back(row);
  }
  return out;
}

double clamped_log(double p) { return std::log(std::max(p, kLogClamp)); }

}  // namespace

ProbVector de_average(std::span<const std::vector<double>> member_probs) {
  const auto members = validate_members(member_probs, "de_average");
  const std::size_t classes = members.front().size();
  std::vector<double> mean(classes, 0.0);
  std::vector<double> column(members.size());
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t m = 0; m < members.size(); ++m) column[m] = members[m][k];
    mean[k] = compensated_mean(column);
  }
  return ProbVector(std::move(mean));
}

UncertaintyTriple de_uncertainty(std::span<const std::vector<double>> member_probs) {
  const auto members = validate_members(member_probs, "de_uncertainty");
  const ProbVector mean = de_average(member_probs);
  std::vector<double> entropies;
  entropies.reserve(members.size());
  for (const auto& p : members) entropies.push_back(shannon_entropy(p));
  UncertaintyTriple out;
  out.total = shannon_entropy(mean);
  out.aleatoric = compensated_mean(entropies);
  out.epistemic = std::max(out.total - out.aleatoric, 0.0);
  out.measure = UncertaintyMeasure::ensemble_mi;
  return out;
}

double ed_loss(const ProbVector& teacher_soft, const ProbVector& student_p) {
  if (teacher_soft.size() != student_p.size()) {
    throw InputError("ed_loss: class counts differ");
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < teacher_soft.size(); ++k) {
    if (teacher_soft[k] > 0.0) loss -= teacher_soft[k] * clamped_log(student_p[k]);
  }
  return loss;
}

StudentLogits::StudentLogits(std::vector<double> z, std::size_t class_count,
                             double temperature)
    : z_(std::move(z)), classes_(class_count), temperature_(temperature) {
  if (classes_ < 2) throw InputError("StudentLogits: need at least 2 classes");
  if (z_.size() != 2 * classes_ + 1) {
    throw InputError("StudentLogits: expected 2C+1 logits");
  }
  if (!(temperature_ > 0.0)) throw InputError("StudentLogits: temperature must be > 0");
}

CredalPrediction credit_forward(const StudentLogits& logits) {
  const std::size_t c = logits.class_count();
  const auto z = logits.z();
  std::vector<double> p = softmax(z.subspan(0, c), logits.temperature());
  std::vector<double> delta(c);
  for (std::size_t k = 0; k < c; ++k) delta[k] = sigmoid(z[c + k]);
  return {ProbVector(std::move(p)), std::move(delta), sigmoid(z[2 * c])};
}

double ced_loss(const CredalPrediction& teacher, const CredalPrediction& student) {
  if (teacher.size() != student.size()) throw InputError("ced_loss: class counts differ");
  double loss = ed_loss(teacher.p_star(), student.p_star());
  for (std::size_t k = 0; k < teacher.size(); ++k) {
    const double d = teacher.delta()[k] - student.delta()[k];
    loss += d * d;
  }
  const double db = teacher.beta() - student.beta();
  return loss + db * db;
}

namespace {

std::vector<double> checked_alpha(std::vector<double> alpha) {
  if (alpha.size() < 2) throw InputError("DirichletPrediction: need at least 2 classes");
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw InputError("DirichletPrediction: concentrations must be positive and finite");
    }
  }
  return alpha;
}

ProbVector normalized(const std::vector<double>& alpha, double alpha0) {
  std::vector<double> pi(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) pi[k] = alpha[k] / alpha0;
  return ProbVector(std::move(pi));
}

}  // namespace

DirichletPrediction::DirichletPrediction(std::vector<double> alpha)
    : alpha_(checked_alpha(std::move(alpha))),
      pi_(normalized(alpha_, compensated_sum(alpha_))),
      alpha0_(compensated_sum(alpha_)) {}

DirichletPrediction edd_forward(std::span<const double> logits) {
  std::vector<double> alpha(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (!std::isfinite(logits[k])) throw InputError("edd_forward: non-finite logit");
    if (logits[k] > kExpOverflowLogit) {
      std::ostringstream os;
      os << "edd_forward: logit " << logits[k] << " overflows exp(); rescale the "
         << "network outputs (e.g. subtract a constant or shrink the final layer)";
      throw InputError(os.str());
    }
    alpha[k] = std::exp(logits[k]);
  }
  return DirichletPrediction(std::move(alpha));
}

UncertaintyTriple edd_uncertainty(const DirichletPrediction& pred) {
  const double a0 = pred.alpha0();
  const double psi0 = digamma(a0 + 1.0);
  double expected = 0.0;
  for (double a : pred.alpha()) expected -= (a / a0) * (digamma(a + 1.0) - psi0);
  UncertaintyTriple out;
  out.total = shannon_entropy(pred.pi());
  out.aleatoric = std::max(expected, 0.0);
  out.epistemic = out.total - out.aleatoric;
  out.measure = UncertaintyMeasure::dirichlet;
  return out;
}

double edd_loss(const DirichletPrediction& pred,
                std::span<const std::vector<double>> member_probs) {
  if (member_probs.empty()) throw InputError("edd_loss: no members");
  const std::size_t classes = pred.size();
  for (const auto& row : member_probs) {
    if (row.size() != classes) throw InputError("edd_loss: class counts differ");
  }
  double loglik = log_gamma(pred.alpha0());
  for (double a : pred.alpha()) loglik -= log_gamma(a);
  const double inv_m = 1.0 / static_cast<double>(member_probs.size());
  for (std::size_t k = 0; k < classes; ++k) {
    double mean_log = 0.0;
    for (const auto& row : member_probs) mean_log += clamped_log(row[k]);
    loglik += (pred.alpha()[k] - 1.0) * mean_log * inv_m;
  }
  return -loglik;
}

}  // namespace ced
