#include "ced/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ced/numeric.hpp"
#include "ced/types.hpp"

namespace ced {

namespace {

void require_both_groups(std::span<const ScoredSample> samples, const char* name) {
  bool id = false, ood = false;
  for (const auto& s : samples) {
    if (!std::isfinite(s.uncertainty)) {
      throw InputError(std::string(name) + ": non-finite uncertainty");
    }
    (s.is_ood ? ood : id) = true;
  }
  if (!id || !ood) throw InputError(std::string(name) + ": need both ID and OOD samples");
}

std::vector<std::size_t> order_by_uncertainty_desc(std::span<const ScoredSample> samples) {
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].uncertainty > samples[b].uncertainty;
  });
  return idx;
}

}  // namespace

double auroc(std::span<const ScoredSample> samples) {
  require_both_groups(samples, "auroc");
  // Mid-ranks in ascending order; the rank sum of the OOD group gives U.
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].uncertainty < samples[b].uncertainty;
  });
  double rank_sum = 0.0;
  std::size_t n_ood = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && samples[idx[j]].uncertainty == samples[idx[i]].uncertainty) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (samples[idx[t]].is_ood) {
        rank_sum += mid;
        ++n_ood;
      }
    }
    i = j;
  }
  const double pos = static_cast<double>(n_ood);
  const double neg = static_cast<double>(samples.size() - n_ood);
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double auprc(std::span<const ScoredSample> samples) {
  require_both_groups(samples, "auprc");
  const auto idx = order_by_uncertainty_desc(samples);
  std::size_t total_pos = 0;
  for (const auto& s : samples) total_pos += s.is_ood ? 1 : 0;
  double ap = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::size_t group_pos = 0;
    while (j < idx.size() && samples[idx[j]].uncertainty == samples[idx[i]].uncertainty) {
      group_pos += samples[idx[j]].is_ood ? 1 : 0;
      ++j;
    }
    tp += group_pos;
    seen += j - i;
    if (group_pos > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(seen);
      ap += precision * static_cast<double>(group_pos) / static_cast<double>(total_pos);
    }
    i = j;
  }
  return ap;
}

EceResult ece_bins(std::span<const ScoredSample> samples, std::size_t bins) {
  if (bins == 0) throw InputError("ece: bins must be >= 1");
  std::vector<std::size_t> count(bins, 0);
  std::vector<std::vector<double>> acc(bins), conf(bins);
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (!s.true_class) continue;
    if (!(s.confidence >= 0.0 && s.confidence <= 1.0)) {
      throw InputError("ece: confidence outside [0, 1]");
    }
    const double g = static_cast<double>(bins);
    // right-closed: c lands in ceil(c * G), corrected when c*G rounds up past an edge
    auto b = static_cast<std::size_t>(std::ceil(s.confidence * g));
    if (b > 0 && s.confidence <= static_cast<double>(b - 1) / g) --b;
    b = std::clamp<std::size_t>(b, 1, bins) - 1;
    ++count[b];
    acc[b].push_back(s.correct() ? 1.0 : 0.0);
    conf[b].push_back(s.confidence);
    ++n;
  }
  if (n == 0) throw InputError("ece: no labeled samples");
  EceResult out;
  std::vector<double> terms;
  for (std::size_t b = 0; b < bins; ++b) {
    BinStats st;
    st.bin_index = b;
    st.count = count[b];
    if (count[b] > 0) {
      st.mean_accuracy = compensated_mean(acc[b]);
      st.mean_confidence = compensated_mean(conf[b]);
      terms.push_back(static_cast<double>(count[b]) / static_cast<double>(n) *
                      std::abs(st.mean_accuracy - st.mean_confidence));
    }
    out.bins.push_back(st);
  }
  out.ece = compensated_sum(terms);
  return out;
}

double ece(std::span<const ScoredSample> samples, std::size_t bins) {
  return ece_bins(samples, bins).ece;
}

ArCurve accuracy_rejection_curve(std::span<const ScoredSample> samples) {
  std::vector<ScoredSample> labeled;
  for (const auto& s : samples) {
    if (s.true_class) labeled.push_back(s);
  }
  const std::size_t n = labeled.size();
  if (n < 2) throw InputError("accuracy_rejection_curve: need at least 2 labeled samples");
  const auto idx = order_by_uncertainty_desc(labeled);
  // Suffix sums of correctness along the descending order: after rejecting
  // the first k entries the remainder is idx[k..n).
  std::vector<std::size_t> correct_from(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) {
    correct_from[i] = correct_from[i + 1] + (labeled[idx[i]].correct() ? 1 : 0);
  }
  ArCurve out;
  std::vector<double> accs;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = static_cast<double>(correct_from[k]) / static_cast<double>(n - k);
    out.points.push_back({static_cast<double>(k) / static_cast<double>(n), a});
    accs.push_back(a);
  }
  out.auarc = compensated_mean(accs);
  return out;
}

double accuracy(std::span<const ScoredSample> samples) {
  std::size_t n = 0, hit = 0;
  for (const auto& s : samples) {
    if (!s.true_class) continue;
    ++n;
    hit += s.correct() ? 1 : 0;
  }
  if (n == 0) throw InputError("accuracy: no labeled samples");
  return static_cast<double>(hit) / static_cast<double>(n);
}

}  // namespace ced
