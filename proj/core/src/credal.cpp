#include "ced/credal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ced/numeric.hpp"

namespace ced {

ProbVector::ProbVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw InputError("ProbVector: need at least 2 classes");
  }
  for (double& v : values_) {
    if (!std::isfinite(v) || v < -kProbTolerance || v > 1.0 + kProbTolerance) {
      std::ostringstream os;
      os << "ProbVector: element " << v << " outside [0, 1]";
      throw InputError(os.str());
    }
    v = std::clamp(v, 0.0, 1.0);
  }
  const double sum = compensated_sum(values_);
  if (std::abs(sum - 1.0) > kProbTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "ProbVector: elements sum to " << sum << ", not 1";
    throw InputError(os.str());
  }
  if (sum != 1.0) {
    for (double& v : values_) v /= sum;
  }
}

ProbVector ProbVector::uniform(std::size_t classes) {
  return ProbVector(std::vector<double>(classes, 1.0 / static_cast<double>(classes)));
}

std::vector<double> IntervalSystem::widths() const {
  std::vector<double> w(lower.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = upper[k] - lower[k];
  return w;
}

Validity check_validity(const IntervalSystem& is) {
  Validity out;
  auto fail = [&out](std::string msg) {
    out.valid = false;
    out.violations.push_back(std::move(msg));
  };
  if (is.lower.size() != is.upper.size()) {
    fail("lower and upper have different lengths");
    return out;
  }
  if (is.lower.empty()) {
    fail("empty interval system");
    return out;
  }
  for (std::size_t k = 0; k < is.size(); ++k) {
    const double lo = is.lower[k];
    const double hi = is.upper[k];
    std::ostringstream os;
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      os << "class " << k << ": non-finite bound";
      fail(os.str());
      continue;
    }
    if (lo < -kProbTolerance) {
      os << "class " << k << ": lower " << lo << " < 0";
      fail(os.str());
    } else if (hi > 1.0 + kProbTolerance) {
      os << "class " << k << ": upper " << hi << " > 1";
      fail(os.str());
    } else if (lo > hi + kProbTolerance) {
      os << "class " << k << ": lower " << lo << " > upper " << hi;
      fail(os.str());
    }
  }
  const double sum_lo = compensated_sum(is.lower);
  const double sum_hi = compensated_sum(is.upper);
  if (sum_lo > 1.0 + kProbTolerance) {
    std::ostringstream os;
    os << "sum of lower bounds " << sum_lo << " > 1";
    fail(os.str());
  }
  if (sum_hi < 1.0 - kProbTolerance) {
    std::ostringstream os;
    os << "sum of upper bounds " << sum_hi << " < 1";
    fail(os.str());
  }
  return out;
}

void require_valid(const IntervalSystem& intervals, const char* context) {
  const Validity v = check_validity(intervals);
  if (v) return;
  std::string msg = std::string(context) + ": invalid interval system";
  for (const auto& s : v.violations) msg += "; " + s;
  throw InputError(msg);
}

CredalPrediction::CredalPrediction(ProbVector p_star, std::vector<double> delta,
                                   double beta)
    : p_star_(std::move(p_star)), delta_(std::move(delta)), beta_(beta) {
  if (delta_.size() != p_star_.size()) {
    throw InputError("CredalPrediction: delta length differs from p_star");
  }
  for (double d : delta_) {
    if (!(d >= 0.0 && d <= 1.0)) throw InputError("CredalPrediction: delta outside [0, 1]");
  }
  if (!(beta_ >= 0.0 && beta_ <= 1.0)) {
    throw InputError("CredalPrediction: beta outside [0, 1]");
  }
}

IntervalSystem wrap_ensemble(std::span<const std::vector<double>> member_probs) {
  if (member_probs.empty()) throw InputError("wrap_ensemble: no members");
  const std::size_t classes = member_probs.front().size();
  IntervalSystem out;
  for (const auto& row : member_probs) {
    if (row.size() != classes) throw InputError("wrap_ensemble: ragged member rows");
    const ProbVector p(row);
    if (out.lower.empty()) {
      out.lower = p.vec();
      out.upper = p.vec();
      continue;
    }
    for (std::size_t k = 0; k < classes; ++k) {
      out.lower[k] = std::min(out.lower[k], p[k]);
      out.upper[k] = std::max(out.upper[k], p[k]);
    }
  }
  require_valid(out, "wrap_ensemble");
  return out;
}

IntervalSystem wrap_ensemble(const Matrix& member_probs) {
  std::vector<std::vector<double>> rows;
  rows.reserve(member_probs.rows());
  for (std::size_t m = 0; m < member_probs.rows(); ++m) {
    auto r = member_probs.row(m);
    rows.emplace_back(r.begin(), r.end());
  }
  return wrap_ensemble(rows);
}

IntersectionProbability intersection_probability(const IntervalSystem& is) {
  require_valid(is, "intersection_probability");
  const std::vector<double> widths = is.widths();
  const double sum_width = compensated_sum(widths);
  double beta = 0.5;
  if (sum_width > 0.0) {
    beta = std::clamp((1.0 - compensated_sum(is.lower)) / sum_width, 0.0, 1.0);
  }
  std::vector<double> p(is.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::clamp(is.lower[k] + beta * widths[k], 0.0, 1.0);
  }
  return {ProbVector(std::move(p)), beta};
}

CredalPrediction credal_label(const IntervalSystem& intervals) {
  auto [p_star, beta] = intersection_probability(intervals);
  std::vector<double> widths = intervals.widths();
  for (double& w : widths) w = std::clamp(w, 0.0, 1.0);
  return {std::move(p_star), std::move(widths), beta};
}

IntervalSystem reconstruct_intervals(const CredalPrediction& pred) {
  const std::size_t classes = pred.size();
  IntervalSystem out;
  out.lower.resize(classes);
  out.upper.resize(classes);
  const double beta = pred.beta();
  for (std::size_t k = 0; k < classes; ++k) {
    const double p = pred.p_star()[k];
    const double d = pred.delta()[k];
    out.lower[k] = std::max(p - beta * d, 0.0);
    out.upper[k] = std::min(p + (1.0 - beta) * d, 1.0);
  }
  return out;
}

std::size_t predict_class(std::span<const double> p) {
  if (p.empty()) throw InputError("predict_class: empty vector");
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::size_t predict_class(const ProbVector& p) { return predict_class(p.values()); }

}  // namespace ced
