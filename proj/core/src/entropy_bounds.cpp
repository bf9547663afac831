#include "ced/entropy_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ced/numeric.hpp"

namespace ced {

std::string_view to_string(UncertaintyMeasure m) {
  switch (m) {
    case UncertaintyMeasure::credal_entropy: return "credal_entropy";
    case UncertaintyMeasure::ensemble_mi: return "ensemble_mi";
    case UncertaintyMeasure::dirichlet: return "dirichlet";
    case UncertaintyMeasure::binary_interval: return "binary_interval";
    case UncertaintyMeasure::shannon: return "shannon";
  }
  return "unknown";
}

double shannon_entropy(std::span<const double> p) {
  double acc = 0.0;
  for (double v : p) acc += xlogx(v);
  return acc == 0.0 ? 0.0 : -acc;
}

namespace {

double clamped_mass(const IntervalSystem& is, double level) {
  double s = 0.0;
  for (std::size_t k = 0; k < is.size(); ++k) {
    s += std::clamp(level, is.lower[k], is.upper[k]);
  }
  return s;
}

}  // namespace

EntropyBound upper_entropy(const IntervalSystem& is) {
  require_valid(is, "upper_entropy");
  const std::size_t classes = is.size();

  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (clamped_mass(is, mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double level = 0.5 * (lo + hi);

  std::vector<double> p(classes);
  std::size_t free_count = 0;
  for (std::size_t k = 0; k < classes; ++k) {
    p[k] = std::clamp(level, is.lower[k], is.upper[k]);
    if (is.lower[k] < level && level < is.upper[k]) ++free_count;
  }
  // Spread the last bit of residual mass over the coordinates sitting at the
  // level so the argument sums to one.
  if (free_count > 0) {
    const double residual = (1.0 - compensated_sum(p)) / static_cast<double>(free_count);
    for (std::size_t k = 0; k < classes; ++k) {
      if (is.lower[k] < level && level < is.upper[k]) {
        p[k] = std::clamp(p[k] + residual, is.lower[k], is.upper[k]);
      }
    }
  }
  EntropyBound out;
  out.value = shannon_entropy(p);
  out.argument = std::move(p);
  return out;
}

namespace {

EntropyBound lower_entropy_exact(const IntervalSystem& is) {
  const std::size_t classes = is.size();
  const std::size_t masks = std::size_t{1} << classes;

  EntropyBound best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<double> vertex(classes);

  // A vertex pins every coordinate to a bound except (at most) one free
  // coordinate j, which absorbs the remaining mass.
  for (std::size_t mask = 0; mask < masks; ++mask) {
    double pinned_sum = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      vertex[k] = (mask >> k) & 1U ? is.upper[k] : is.lower[k];
      pinned_sum += vertex[k];
    }
    for (std::size_t j = 0; j < classes; ++j) {
      if ((mask >> j) & 1U) continue;  // j's own bit is irrelevant; visit once
      const double pj = 1.0 - (pinned_sum - vertex[j]);
      if (pj < is.lower[j] - kProbTolerance || pj > is.upper[j] + kProbTolerance) continue;
      const double saved = vertex[j];
      vertex[j] = std::clamp(pj, is.lower[j], is.upper[j]);
      const double h = shannon_entropy(vertex);
      if (h < best.value) {
        best.value = h;
        best.argument = vertex;
      }
      vertex[j] = saved;
    }
  }
  return best;
}

EntropyBound lower_entropy_greedy(const IntervalSystem& is) {
  const std::size_t classes = is.size();
  std::vector<double> p = is.lower;
  std::vector<bool> raised(classes, false);
  double remaining = 1.0 - compensated_sum(p);
  while (remaining > 0.0) {
    std::size_t pick = classes;
    double best_reach = -1.0;
    for (std::size_t k = 0; k < classes; ++k) {
      if (raised[k]) continue;
      const double reach = std::min(is.upper[k], is.lower[k] + remaining);
      if (reach > best_reach) {
        best_reach = reach;
        pick = k;
      }
    }
    if (pick == classes) break;
    raised[pick] = true;
    remaining -= best_reach - p[pick];
    p[pick] = best_reach;
  }
  EntropyBound out;
  out.value = shannon_entropy(p);
  out.argument = std::move(p);
  out.exact = false;
  return out;
}

}  // namespace

EntropyBound lower_entropy(const IntervalSystem& is) {
  require_valid(is, "lower_entropy");
  if (is.size() <= kExactLowerEntropyMaxClasses) return lower_entropy_exact(is);
  return lower_entropy_greedy(is);
}

UncertaintyTriple decompose_uncertainty(const IntervalSystem& is) {
  const EntropyBound hi = upper_entropy(is);
  const EntropyBound lo = lower_entropy(is);
  UncertaintyTriple out;
  out.total = hi.value;
  out.aleatoric = std::min(lo.value, hi.value);
  out.epistemic = out.total - out.aleatoric;
  out.measure = UncertaintyMeasure::credal_entropy;
  out.exact = hi.exact && lo.exact;
  return out;
}

BinaryIntervalUncertainty binary_interval_uncertainty(double lower, double upper) {
  if (!(lower >= 0.0 && upper <= 1.0 && lower <= upper)) {
    throw InputError("binary_interval_uncertainty: need 0 <= lower <= upper <= 1");
  }
  return {upper - lower, std::min(1.0 - lower, upper)};
}

UncertaintyTriple binary_interval_triple(const IntervalSystem& is) {
  if (is.size() != 2) throw InputError("binary_interval_triple: requires exactly 2 classes");
  const auto [eu, tu] = binary_interval_uncertainty(is.lower[1], is.upper[1]);
  UncertaintyTriple out;
  out.total = tu;
  out.epistemic = eu;
  out.aleatoric = std::max(tu - eu, 0.0);
  out.measure = UncertaintyMeasure::binary_interval;
  return out;
}

namespace {

struct GridScan {
  const IntervalSystem& is;
  std::size_t dependent;
  std::vector<std::vector<double>> axes;
  std::vector<double> point;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void visit(std::size_t axis, double mass) {
    if (axis == is.size()) {
      const double pd = 1.0 - mass;
      if (pd < is.lower[dependent] - 1e-12 || pd > is.upper[dependent] + 1e-12) return;
      point[dependent] = std::clamp(pd, is.lower[dependent], is.upper[dependent]);
      const double h = shannon_entropy(point);
      min = std::min(min, h);
      max = std::max(max, h);
      return;
    }
    if (axis == dependent) {
      visit(axis + 1, mass);
      return;
    }
    for (double v : axes[axis]) {
      if (mass + v > 1.0 + 1e-12) break;  // axis values are increasing
      point[axis] = v;
      visit(axis + 1, mass + v);
    }
  }
};

}  // namespace

EntropyRange grid_oracle_entropy_bounds(const IntervalSystem& is, double step) {
  require_valid(is, "grid_oracle_entropy_bounds");
  if (is.size() > 4) throw InputError("grid_oracle_entropy_bounds: at most 4 classes");
  if (!(step >= 1e-4 && step <= 0.05)) {
    throw InputError("grid_oracle_entropy_bounds: step must be in [1e-4, 0.05]");
  }
  std::vector<std::vector<double>> axes(is.size());
  for (std::size_t k = 0; k < is.size(); ++k) {
    const double lo = is.lower[k];
    const double hi = is.upper[k];
    for (std::size_t i = 0;; ++i) {
      const double v = lo + static_cast<double>(i) * step;
      if (v >= hi) break;
      axes[k].push_back(v);
    }
    axes[k].push_back(hi);
  }
  EntropyRange out{std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
  for (std::size_t d = 0; d < is.size(); ++d) {
    GridScan scan{is, d, axes, std::vector<double>(is.size(), 0.0)};
    scan.visit(0, 0.0);
    out.min = std::min(out.min, scan.min);
    out.max = std::max(out.max, scan.max);
  }
  return out;
}

}  // namespace ced
