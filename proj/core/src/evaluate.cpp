#include "ced/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ced/credal.hpp"
#include "ced/heads.hpp"
#include "ced/text_io.hpp"

namespace ced {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::snn: return "snn";
    case ModelKind::de: return "de";
    case ModelKind::de_credal: return "de_credal";
    case ModelKind::ed: return "ed";
    case ModelKind::edd: return "edd";
    case ModelKind::ced: return "ced";
  }
  return "unknown";
}

std::string_view to_string(UncertaintyKind k) {
  switch (k) {
    case UncertaintyKind::eu: return "eu";
    case UncertaintyKind::tu: return "tu";
    case UncertaintyKind::au: return "au";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::snn, ModelKind::de, ModelKind::de_credal, ModelKind::ed,
                 ModelKind::edd, ModelKind::ced}) {
    if (s == to_string(k)) return k;
  }
  throw InputError("unknown model kind '" + std::string(s) +
                   "' (expected snn|de|de_credal|ed|edd|ced)");
}

UncertaintyKind parse_uncertainty_kind(std::string_view s) {
  if (s == "eu") return UncertaintyKind::eu;
  if (s == "tu") return UncertaintyKind::tu;
  if (s == "au") return UncertaintyKind::au;
  throw InputError("unknown uncertainty kind '" + std::string(s) + "' (expected eu|tu|au)");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

UncertaintyTriple credal_uq(const IntervalSystem& is, const PredictOptions& opt) {
  if (opt.binary_interval) return binary_interval_triple(is);
  return decompose_uncertainty(is);
}

UncertaintyTriple shannon_only(const std::vector<double>& p) {
  UncertaintyTriple uq;
  uq.total = shannon_entropy(p);
  uq.aleatoric = kNaN;
  uq.epistemic = kNaN;
  uq.measure = UncertaintyMeasure::shannon;
  return uq;
}

}  // namespace

std::vector<SamplePrediction> predict_ensemble(std::span<const Matrix> member_logits,
                                               ModelKind kind, const PredictOptions& opt) {
  if (kind != ModelKind::de && kind != ModelKind::de_credal) {
    throw InputError("predict_ensemble: model kind must be de or de_credal");
  }
  if (member_logits.empty()) throw InputError("predict_ensemble: no members");
  const std::size_t n = member_logits.front().rows();
  const std::size_t c = member_logits.front().cols();
  for (const auto& m : member_logits) {
    if (m.rows() != n || m.cols() != c) throw InputError("predict_ensemble: member shapes differ");
  }
  if (kind == ModelKind::de && opt.binary_interval) {
    throw InputError("binary_interval measure needs a credal model (de_credal or ced)");
  }
  std::vector<SamplePrediction> out;
  out.reserve(n);
  std::vector<std::vector<double>> probs(member_logits.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < member_logits.size(); ++m) {
      probs[m] = softmax(member_logits[m].row(i));
    }
    SamplePrediction sp;
    if (kind == ModelKind::de) {
      sp.probs = de_average(probs).vec();
      sp.uq = de_uncertainty(probs);
    } else {
      const IntervalSystem is = wrap_ensemble(probs);
      sp.probs = intersection_probability(is).p_star.vec();
      sp.uq = credal_uq(is, opt);
    }
    out.push_back(std::move(sp));
  }
  return out;
}

std::vector<SamplePrediction> predict_single(const Matrix& logits, std::size_t classes,
                                             ModelKind kind, const PredictOptions& opt) {
  if (kind == ModelKind::de || kind == ModelKind::de_credal) {
    throw InputError("predict_single: ensembles need predict_ensemble");
  }
  const std::size_t width = kind == ModelKind::ced ? 2 * classes + 1 : classes;
  if (logits.cols() != width) {
    throw InputError("predict_single: " + std::string(to_string(kind)) + " expects " +
                     std::to_string(width) + " logits per row, got " +
                     std::to_string(logits.cols()));
  }
  if (opt.binary_interval && kind != ModelKind::ced) {
    throw InputError("binary_interval measure needs a credal model (de_credal or ced)");
  }
  std::vector<SamplePrediction> out;
  out.reserve(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto z = logits.row(i);
    SamplePrediction sp;
    switch (kind) {
      case ModelKind::snn:
      case ModelKind::ed:
        sp.probs = softmax(z);
        sp.uq = shannon_only(sp.probs);
        break;
      case ModelKind::edd: {
        const DirichletPrediction d = edd_forward(z);
        sp.probs = d.pi().vec();
        sp.uq = edd_uncertainty(d);
        break;
      }
      case ModelKind::ced: {
        const CredalPrediction pred =
            credit_forward(StudentLogits(std::vector<double>(z.begin(), z.end()), classes));
        sp.probs = pred.p_star().vec();
        sp.uq = credal_uq(reconstruct_intervals(pred), opt);
        break;
      }
      default: break;
    }
    out.push_back(std::move(sp));
  }
  return out;
}

std::vector<UncertaintyKind> supported_kinds(ModelKind model, UncertaintyMeasure measure) {
  if (model == ModelKind::snn || model == ModelKind::ed ||
      measure == UncertaintyMeasure::shannon) {
    return {UncertaintyKind::tu};
  }
  if (measure == UncertaintyMeasure::binary_interval) {
    return {UncertaintyKind::eu, UncertaintyKind::tu};
  }
  return {UncertaintyKind::eu, UncertaintyKind::tu, UncertaintyKind::au};
}

void require_supported(ModelKind model, UncertaintyMeasure measure, UncertaintyKind kind) {
  const auto ok = supported_kinds(model, measure);
  if (std::find(ok.begin(), ok.end(), kind) != ok.end()) return;
  if (model == ModelKind::ed) throw InputError("ED provides TU only");
  if (model == ModelKind::snn) throw InputError("SNN provides TU only");
  if (measure == UncertaintyMeasure::binary_interval) {
    throw InputError("binary_interval measure provides EU and TU only");
  }
  throw InputError(std::string(to_string(model)) + " does not provide " +
                   std::string(to_string(kind)));
}

double select_uncertainty(const UncertaintyTriple& uq, UncertaintyKind kind) {
  switch (kind) {
    case UncertaintyKind::eu: return uq.epistemic;
    case UncertaintyKind::tu: return uq.total;
    case UncertaintyKind::au: return uq.aleatoric;
  }
  return kNaN;
}

const KindMetrics& EvalReport::metrics(UncertaintyKind k) const {
  for (const auto& m : per_kind) {
    if (m.kind == k) return m;
  }
  throw std::out_of_range("EvalReport: uncertainty kind '" + std::string(to_string(k)) +
                          "' was not evaluated");
}

EvalReport evaluate_predictions(std::span<const SamplePrediction> id,
                                std::span<const int> id_labels,
                                std::span<const SamplePrediction> ood, const EvalOptions& opt) {
  if (id.empty()) throw InputError("evaluate: no ID samples");
  if (id_labels.size() != id.size()) throw InputError("evaluate: ID label count mismatch");
  const UncertaintyMeasure measure = id.front().uq.measure;
  const std::size_t classes = id.front().probs.size();
  auto check = [&](const SamplePrediction& p) {
    if (p.uq.measure != measure || p.probs.size() != classes) {
      throw InputError("evaluate: predictions mix measures or class counts");
    }
  };
  for (const auto& p : id) check(p);
  for (const auto& p : ood) check(p);

  std::vector<UncertaintyKind> kinds = opt.kinds;
  if (kinds.empty()) kinds = supported_kinds(opt.model, measure);
  for (auto k : kinds) require_supported(opt.model, measure, k);

  EvalReport r;
  r.model_name = opt.model_name;
  r.model = opt.model;
  r.measure = measure;
  auto add_row = [&](const SamplePrediction& p, bool is_ood, std::optional<std::size_t> y) {
    SampleRow row;
    row.is_ood = is_ood;
    row.true_class = y;
    row.predicted_class = predict_class(p.probs);
    row.confidence = p.probs[row.predicted_class];
    row.uq = p.uq;
    r.exact = r.exact && p.uq.exact;
    r.samples.push_back(row);
  };
  for (std::size_t i = 0; i < id.size(); ++i) {
    if (id_labels[i] < 0 || static_cast<std::size_t>(id_labels[i]) >= classes) {
      throw InputError("evaluate: ID label " + std::to_string(id_labels[i]) + " out of range");
    }
    add_row(id[i], false, static_cast<std::size_t>(id_labels[i]));
  }
  for (const auto& p : ood) add_row(p, true, std::nullopt);

  auto scored = [&](UncertaintyKind k, bool id_only) {
    std::vector<ScoredSample> s;
    for (const auto& row : r.samples) {
      if (id_only && row.is_ood) continue;
      s.push_back({select_uncertainty(row.uq, k), row.is_ood, row.predicted_class, row.true_class,
                   row.confidence});
    }
    return s;
  };

  const auto id_scores = scored(kinds.front(), true);
  r.accuracy = accuracy(id_scores);
  const EceResult e = ece_bins(id_scores, opt.ece_bins);
  r.ece = e.ece;
  r.bins = e.bins;

  for (auto k : kinds) {
    KindMetrics km;
    km.kind = k;
    if (!ood.empty()) {
      const auto all = scored(k, false);
      km.auroc = auroc(all);
      km.auprc = auprc(all);
    } else {
      km.auroc = km.auprc = kNaN;
    }
    const auto ids = scored(k, true);
    if (ids.size() >= 2) km.ar = accuracy_rejection_curve(ids);
    r.per_kind.push_back(std::move(km));
  }
  return r;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string fmt(double v) { return std::isnan(v) ? "nan" : format_double(v); }

}  // namespace

void write_report_csv(const EvalReport& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "model,uncertainty,metric,value\n";
  out << r.model_name << ",none,accuracy," << fmt(r.accuracy) << '\n';
  out << r.model_name << ",none,ece," << fmt(r.ece) << '\n';
  for (const auto& k : r.per_kind) {
    const std::string prefix = r.model_name + "," + std::string(to_string(k.kind)) + ",";
    out << prefix << "auroc," << fmt(k.auroc) << '\n';
    out << prefix << "auprc," << fmt(k.auprc) << '\n';
    out << prefix << "auarc," << fmt(k.ar.auarc) << '\n';
  }
}

void write_summary(const EvalReport& r, const std::filesystem::path& path,
                   std::string_view manifest_ref) {
  auto out = open_out(path);
  std::size_t n_id = 0, n_ood = 0;
  for (const auto& s : r.samples) (s.is_ood ? n_ood : n_id) += 1;
  out << "model: " << r.model_name << " (" << to_string(r.model) << ")\n";
  out << "measure: " << to_string(r.measure) << (r.exact ? "" : " (heuristic lower entropy)")
      << '\n';
  out << "manifest: " << manifest_ref << '\n';
  out << "samples: " << n_id << " id, " << n_ood << " ood\n";
  out << "accuracy: " << fmt(r.accuracy) << '\n';
  out << "ece (" << r.bins.size() << " bins): " << fmt(r.ece) << '\n';
  for (const auto& k : r.per_kind) {
    out << to_string(k.kind) << ": auroc " << fmt(k.auroc) << "  auprc " << fmt(k.auprc)
        << "  auarc " << fmt(k.ar.auarc) << '\n';
  }
}

void write_samples_csv(const EvalReport& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "index,is_ood,true_class,predicted_class,confidence,tu,au,eu\n";
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const auto& s = r.samples[i];
    out << i << ',' << (s.is_ood ? 1 : 0) << ','
        << (s.true_class ? std::to_string(*s.true_class) : std::string()) << ','
        << s.predicted_class << ',' << fmt(s.confidence) << ',' << fmt(s.uq.total) << ','
        << fmt(s.uq.aleatoric) << ',' << fmt(s.uq.epistemic) << '\n';
  }
}

void write_ar_csv(const EvalReport& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "uncertainty,rejection_rate,accuracy\n";
  for (const auto& k : r.per_kind) {
    for (const auto& p : k.ar.points) {
      out << to_string(k.kind) << ',' << fmt(p.rejection_rate) << ',' << fmt(p.accuracy) << '\n';
    }
  }
}

}  // namespace ced
