#pragma once

// Turns raw model outputs into per-sample predictions and uncertainties and
// scores them: OOD detection per uncertainty kind, accuracy, ECE and
// accuracy-rejection curves.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ced/entropy_bounds.hpp"
#include "ced/metrics.hpp"
#include "ced/types.hpp"

namespace ced {

/// snn: single softmax network. de: ensemble with mutual-information UQ.
/// de_credal: ensemble wrapped into a credal set. ed / edd / ced: students.
enum class ModelKind { snn, de, de_credal, ed, edd, ced };
enum class UncertaintyKind { eu, tu, au };

std::string_view to_string(ModelKind k);
std::string_view to_string(UncertaintyKind k);
ModelKind parse_model_kind(std::string_view s);
UncertaintyKind parse_uncertainty_kind(std::string_view s);

struct SamplePrediction {
  std::vector<double> probs;  // class-prediction vector: p*, mean, pi or softmax
  UncertaintyTriple uq;
};

struct PredictOptions {
  // Use the two-class interval measures for credal models (requires C = 2).
  bool binary_interval = false;
};

/// Ensemble predictions from M member logit tables (N x C each).
std::vector<SamplePrediction> predict_ensemble(std::span<const Matrix> member_logits,
                                               ModelKind kind, const PredictOptions& opt = {});

/// Single-network predictions from an N x width logit table. `classes` is C;
/// the width must be 2C+1 for ced and C otherwise.
std::vector<SamplePrediction> predict_single(const Matrix& logits, std::size_t classes,
                                             ModelKind kind, const PredictOptions& opt = {});

/// Uncertainty kinds a model/measure pairing can provide.
std::vector<UncertaintyKind> supported_kinds(ModelKind model, UncertaintyMeasure measure);

/// Throws InputError naming the mismatch when the pairing is unsupported
/// (e.g. "ED provides TU only").
void require_supported(ModelKind model, UncertaintyMeasure measure, UncertaintyKind kind);

double select_uncertainty(const UncertaintyTriple& uq, UncertaintyKind kind);

struct KindMetrics {
  UncertaintyKind kind = UncertaintyKind::eu;
  double auroc = 0.0;
  double auprc = 0.0;
  ArCurve ar;  // on ID samples, rejecting by this kind
};

struct SampleRow {
  bool is_ood = false;
  std::optional<std::size_t> true_class;
  std::size_t predicted_class = 0;
  double confidence = 0.0;
  UncertaintyTriple uq;
};

struct EvalReport {
  std::string model_name;
  ModelKind model = ModelKind::ced;
  UncertaintyMeasure measure = UncertaintyMeasure::credal_entropy;
  bool exact = true;  // false if any lower entropy came from the heuristic
  double accuracy = 0.0;
  double ece = 0.0;
  std::vector<BinStats> bins;
  std::vector<KindMetrics> per_kind;
  std::vector<SampleRow> samples;

  const KindMetrics& metrics(UncertaintyKind k) const;
};

struct EvalOptions {
  std::string model_name = "model";
  ModelKind model = ModelKind::ced;
  // Empty: every kind the model supports.
  std::vector<UncertaintyKind> kinds;
  std::size_t ece_bins = kDefaultEceBins;
};

/// ID predictions need labels (one per row, in [0, C)); OOD rows are
/// unlabeled. Unsupported kinds are rejected before any metric runs.
EvalReport evaluate_predictions(std::span<const SamplePrediction> id,
                                std::span<const int> id_labels,
                                std::span<const SamplePrediction> ood, const EvalOptions& opt);

// ---- persistence ------------------------------------------------------------

/// One row per (model, uncertainty kind, metric): model,uncertainty,metric,value.
/// Kind-independent metrics use uncertainty "none".
void write_report_csv(const EvalReport& r, const std::filesystem::path& path);
void write_summary(const EvalReport& r, const std::filesystem::path& path,
                   std::string_view manifest_ref);
void write_samples_csv(const EvalReport& r, const std::filesystem::path& path);
void write_ar_csv(const EvalReport& r, const std::filesystem::path& path);

}  // namespace ced
