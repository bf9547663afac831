#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ced::testing {

std::vector<double> random_simplex(Rng& rng, std::size_t classes) {
  std::uniform_int_distribution<int> shape(0, 19);
  std::vector<double> p(classes, 0.0);
  const int s = shape(rng);
  if (s == 0) {
    p[std::uniform_int_distribution<std::size_t>(0, classes - 1)(rng)] = 1.0;
    return p;
  }
  std::exponential_distribution<double> e(1.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < classes; ++k) {
    p[k] = (s == 1 && k % 2 == 1) ? 0.0 : e(rng);
    sum += p[k];
  }
  if (sum == 0.0) {
    p.assign(classes, 0.0);
    p[0] = 1.0;
    return p;
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<std::vector<double>> random_ensemble(Rng& rng, std::size_t members,
                                                 std::size_t classes) {
  std::vector<std::vector<double>> out;
  out.reserve(members);
  for (std::size_t m = 0; m < members; ++m) out.push_back(random_simplex(rng, classes));
  return out;
}

IntervalSystem random_intervals(Rng& rng, std::size_t classes, std::size_t max_members) {
  const std::size_t m = std::uniform_int_distribution<std::size_t>(1, max_members)(rng);
  return wrap_ensemble(random_ensemble(rng, m, classes));
}

IntervalSystem enlarge(Rng& rng, const IntervalSystem& s) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  IntervalSystem out = s;
  for (std::size_t k = 0; k < s.size(); ++k) {
    out.lower[k] = s.lower[k] * u(rng);
    out.upper[k] = s.upper[k] + (1.0 - s.upper[k]) * u(rng);
  }
  return out;
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = n(rng);
  return m;
}

namespace {

constexpr double kSumTol = 1e-9;
constexpr double kRoundTripTol = 1e-12;

void note(std::vector<std::string>& out, const std::string& what, std::size_t k, double a,
          double b) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at class " << k << ": " << a << " vs " << b;
  out.push_back(os.str());
}

}  // namespace

std::vector<std::string> reconstruction_violations(const CredalPrediction& pred) {
  std::vector<std::string> out;
  const IntervalSystem r = reconstruct_intervals(pred);
  for (const auto& v : check_validity(r).violations) out.push_back("reconstructed: " + v);
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double p = pred.p_star()[k];
    if (r.lower[k] > p || p > r.upper[k]) note(out, "p* outside rebuilt interval", k, p, r.lower[k]);
    const double w = r.upper[k] - r.lower[k];
    const double d = pred.delta()[k];
    const double clip = std::max(0.0, pred.beta() * d - p) +
                        std::max(0.0, p + (1.0 - pred.beta()) * d - 1.0);
    if (w > d + kRoundTripTol) note(out, "rebuilt width exceeds delta", k, w, d);
    if (std::abs((d - w) - clip) > kRoundTripTol) note(out, "width loss differs from clip", k, d - w, clip);
  }
  return out;
}

std::vector<std::string> credal_violations(const std::vector<std::vector<double>>& members) {
  std::vector<std::string> out;
  const IntervalSystem is = wrap_ensemble(members);
  for (const auto& v : check_validity(is).violations) out.push_back("wrap: " + v);
  for (std::size_t k = 0; k < is.size(); ++k) {
    for (const auto& raw : members) {
      const ProbVector m(raw);
      if (m[k] < is.lower[k] || m[k] > is.upper[k]) note(out, "member outside wrap", k, m[k], is.lower[k]);
    }
  }
  const IntersectionProbability ip = intersection_probability(is);
  if (!(ip.beta >= 0.0 && ip.beta <= 1.0)) note(out, "beta outside [0,1]", 0, ip.beta, 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < is.size(); ++k) {
    sum += ip.p_star[k];
    if (ip.p_star[k] < is.lower[k] - kSumTol || ip.p_star[k] > is.upper[k] + kSumTol) {
      note(out, "p* outside interval", k, ip.p_star[k], is.lower[k]);
    }
  }
  if (std::abs(sum - 1.0) > kSumTol) note(out, "p* sum", 0, sum, 1.0);

  const CredalPrediction label = credal_label(is);
  const IntervalSystem back = reconstruct_intervals(label);
  for (std::size_t k = 0; k < is.size(); ++k) {
    if (std::abs(back.lower[k] - is.lower[k]) > kRoundTripTol) {
      note(out, "round-trip lower", k, back.lower[k], is.lower[k]);
    }
    if (std::abs(back.upper[k] - is.upper[k]) > kRoundTripTol) {
      note(out, "round-trip upper", k, back.upper[k], is.upper[k]);
    }
  }
  for (auto& v : reconstruction_violations(label)) out.push_back(std::move(v));
  return out;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                          double floor) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double den = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / den);
  }
  return worst;
}

TeacherLogits random_teacher(Rng& rng, std::size_t members, std::size_t samples,
                             std::size_t classes, double scale) {
  TeacherLogits t;
  for (std::size_t m = 0; m < members; ++m) {
    t.members.push_back(random_matrix(rng, samples, classes, scale));
  }
  return t;
}

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

double logit_gradient_error(BatchLoss loss, const TeacherLogits& teacher, const Matrix& logits,
                            double temperature, double h) {
  const auto rows = all_rows(logits.rows());
  ad::Tensor z = ad::Tensor::from_matrix(logits);
  {
    ad::Tape tape;
    tape.backward(loss(tape.parameter(z), teacher, rows, temperature));
  }
  const auto numeric = numeric_gradient(
      [&](const std::vector<double>& v) {
        ad::Tape tape;
        return loss(tape.constant(Matrix(logits.rows(), logits.cols(), v)), teacher, rows,
                    temperature)
            .scalar();
      },
      logits.data(), h);
  return max_relative_error(*z.grad, numeric);
}

double parameter_gradient_error(BatchLoss loss, const TeacherLogits& teacher, Mlp& net,
                                const Matrix& inputs, double temperature, double h) {
  const auto rows = all_rows(inputs.rows());
  auto eval = [&] {
    ad::Tape tape;
    return loss(net.forward(tape, tape.constant(inputs)), teacher, rows, temperature).scalar();
  };
  net.zero_grad();
  {
    ad::Tape tape;
    tape.backward(loss(net.forward(tape, tape.constant(inputs)), teacher, rows, temperature));
  }
  std::vector<double> analytic, numeric;
  for (ad::Tensor* p : net.parameters()) {
    const std::vector<double> g = p->grad.value_or(std::vector<double>(p->size(), 0.0));
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double x0 = p->values[i];
      p->values[i] = x0 + h;
      const double fp = eval();
      p->values[i] = x0 - h;
      const double fm = eval();
      p->values[i] = x0;
      analytic.push_back(g[i]);
      numeric.push_back((fp - fm) / (2.0 * h));
    }
  }
  net.zero_grad();
  return max_relative_error(analytic, numeric);
}

}  // namespace ced::testing
