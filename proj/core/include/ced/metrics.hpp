#pragma once

// OOD-detection and calibration metrics over scored samples.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ced {

struct ScoredSample {
  double uncertainty = 0.0;
  bool is_ood = false;
  std::size_t predicted_class = 0;
  std::optional<std::size_t> true_class;
  double confidence = 0.0;  // max of the class-prediction vector

  bool correct() const { return true_class && *true_class == predicted_class; }
};

struct BinStats {
  std::size_t bin_index = 0;
  std::size_t count = 0;
  double mean_accuracy = 0.0;
  double mean_confidence = 0.0;
};

inline constexpr std::size_t kDefaultEceBins = 15;

/// P(u_ood > u_id) + 0.5 P(u_ood == u_id). Throws InputError unless both
/// groups are present.
double auroc(std::span<const ScoredSample> samples);

/// Average precision with OOD as the positive class; tied scores form one
/// threshold step.
double auprc(std::span<const ScoredSample> samples);

struct EceResult {
  double ece = 0.0;
  std::vector<BinStats> bins;
};

/// Equal-width bins ((g-1)/G, g/G], g = 1..G; confidence 0 falls in bin 1.
/// Uses labeled samples only; throws if there are none.
EceResult ece_bins(std::span<const ScoredSample> samples, std::size_t bins = kDefaultEceBins);
double ece(std::span<const ScoredSample> samples, std::size_t bins = kDefaultEceBins);

struct ArPoint {
  double rejection_rate = 0.0;
  double accuracy = 0.0;
};

struct ArCurve {
  std::vector<ArPoint> points;
  double auarc = 0.0;
};

/// Rejects the k most uncertain labeled samples for k = 0..N-1 (stable on
/// ties, in input order) and records the accuracy on the rest.
ArCurve accuracy_rejection_curve(std::span<const ScoredSample> samples);

double accuracy(std::span<const ScoredSample> samples);

}  // namespace ced
