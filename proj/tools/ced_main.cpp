// ced: command-line front end for credal ensemble distillation.
//
//   ced gen-data       --split train|test|ood --out data.csv
//   ced train-ensemble --data train.csv --out ensemble.model [--archive a.lga]
//   ced distill        --method ced --temperature 2.5 (--teacher a.lga | --ensemble e.model)
//                      --data train.csv --out student.model
//   ced wrap           --archive a.lga --out uq.csv
//   ced eval           (--model m.model --id test.csv --ood ood.csv |
//                       --id-archive id.lga --ood-archive ood.lga) --out dir
//   ced oracle-check   --classes 3 --cases 1000 --step 0.005
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or input-schema error.
// Failures print one line to stderr: error: code=<code> message="<text>".

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ced/archive.hpp"
#include "ced/config.hpp"
#include "ced/credal.hpp"
#include "ced/entropy_bounds.hpp"
#include "ced/heads.hpp"
#include "ced/model_io.hpp"
#include "ced/pipeline.hpp"
#include "ced/synthetic.hpp"
#include "ced/text_io.hpp"

namespace fs = std::filesystem;
using namespace ced;

namespace {

// Thrown for bad invocations detected by the tool itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<double> temperature;
  std::optional<std::size_t> members;
  std::optional<std::string> uncertainty;
  std::string out;
};

void add_common(CLI::App* app, CommonFlags& f, bool out_required = true) {
  app->add_option("--config", f.config, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "base random seed");
  auto* out = app->add_option("--out", f.out, "output path");
  if (out_required) out->required();
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg;
  if (!f.config.empty()) apply_config_file(cfg, f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.method) cfg.set("method", *f.method);
  if (f.temperature) cfg.set("temperature", format_double(*f.temperature));
  if (f.members) cfg.members = *f.members;
  if (f.uncertainty) cfg.set("uncertainty", *f.uncertainty);
  cfg.validate();
  return cfg;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

RunManifest base_manifest(const std::string& command, const RunConfig& cfg) {
  RunManifest m;
  m.command = command;
  m.config = cfg.snapshot();
  m.started = utc_timestamp();
  return m;
}

void finish_manifest(RunManifest& m, const fs::path& output) {
  m.outputs.push_back(output.string());
  m.finished = utc_timestamp();
  write_manifest(m, manifest_path_for(output));
}

// ---- gen-data ---------------------------------------------------------------

int cmd_gen_data(const CommonFlags& f, const std::string& split, const std::string& kind) {
  RunConfig cfg = resolve_config(f);
  const PipelineSeeds seeds = pipeline_seeds(cfg.seed);
  SyntheticKind k = cfg.dataset;
  std::size_t n = cfg.train_samples;
  std::uint64_t seed = seeds.train_data;
  if (split == "test") {
    n = cfg.test_samples;
    seed = seeds.test_data;
  } else if (split == "ood") {
    k = SyntheticKind::ood_cluster;
    n = cfg.ood_samples;
    seed = seeds.ood_data;
  }
  if (!kind.empty()) k = parse_synthetic_kind(kind);
  const Dataset data = gen_synthetic(cfg.synthetic(k, n, seed));
  write_dataset_csv(data, f.out);
  RunManifest m = base_manifest("gen-data", cfg);
  m.seeds = {{"data", seed}};
  finish_manifest(m, f.out);
  return 0;
}

// ---- train-ensemble ---------------------------------------------------------

LogitArchive make_archive(const std::vector<Mlp>& members, const Dataset& data,
                          const std::string& split) {
  LogitArchive a;
  a.manifest.class_count = data.class_count;
  a.manifest.member_count = members.size();
  a.manifest.sample_count = data.size();
  a.manifest.split = split;
  a.manifest.creator = std::string("ced ") + kArtifactVersion;
  for (const auto& m : members) a.members.push_back(m.forward(data.features));
  a.labels = data.labels;
  return a;
}

int cmd_train_ensemble(const CommonFlags& f, const std::string& data_path,
                       const std::string& archive_path, const std::string& archive_data) {
  RunConfig cfg = resolve_config(f);
  require_file(data_path, "dataset");
  if (!archive_data.empty()) require_file(archive_data, "archive dataset");
  const Dataset train = read_dataset_csv(data_path);
  if (!train.labeled()) throw UsageError("training data contains unlabeled rows");
  cfg.classes = train.class_count;
  std::optional<Dataset> other;
  if (!archive_data.empty()) other = read_dataset_csv(archive_data);

  const Teacher teacher = train_teacher(cfg, train);
  write_model(ModelFile{ModelKind::de, train.class_count, teacher.members}, f.out);

  RunManifest m = base_manifest("train-ensemble", cfg);
  const PipelineSeeds seeds = pipeline_seeds(cfg.seed);
  for (std::size_t i = 0; i < cfg.members; ++i) {
    m.seeds.emplace_back("member" + std::to_string(i), seeds.teacher + i);
    m.loss_history.push_back({"member" + std::to_string(i), teacher.histories[i]});
  }
  m.method = "snn";
  m.inputs.push_back(data_path);
  if (!archive_path.empty()) {
    const Dataset& src = other ? *other : train;
    write_archive(make_archive(teacher.members, src, other ? "eval" : "train"), archive_path);
    m.outputs.push_back(archive_path);
    if (other) m.inputs.push_back(archive_data);
  }
  finish_manifest(m, f.out);
  return 0;
}

// ---- distill ----------------------------------------------------------------

int cmd_distill(const CommonFlags& f, const std::string& teacher_path,
                const std::string& ensemble_path, const std::string& data_path) {
  RunConfig cfg = resolve_config(f);
  if (teacher_path.empty() == ensemble_path.empty()) {
    throw UsageError("distill needs exactly one of --teacher or --ensemble");
  }
  require_file(data_path, "dataset");
  const Dataset train = read_dataset_csv(data_path);
  TeacherLogits teacher;
  std::string teacher_ref;
  if (!teacher_path.empty()) {
    require_file(teacher_path, "teacher archive");
    const LogitArchive a = read_archive(teacher_path);
    if (a.manifest.sample_count != train.size()) {
      throw UsageError("teacher archive has " + std::to_string(a.manifest.sample_count) +
                       " rows but the dataset has " + std::to_string(train.size()));
    }
    teacher.members = a.raw_members();
    teacher_ref = teacher_path;
  } else {
    require_file(ensemble_path, "ensemble model");
    const ModelFile e = read_model(ensemble_path);
    if (e.kind != ModelKind::de && e.kind != ModelKind::de_credal) {
      throw UsageError("--ensemble must be an ensemble model file");
    }
    teacher = teacher_logits(e.networks, train.features);
    teacher_ref = ensemble_path;
  }
  teacher.validate();
  const std::size_t classes = teacher.class_count();

  const PipelineSeeds seeds = pipeline_seeds(cfg.seed);
  TrainConfig tc = cfg.train_config();
  tc.seed = seeds.student;
  const MlpSpec spec =
      cfg.mlp_spec(train.dim(), student_output_dim(cfg.method, classes), seeds.student);
  const TrainResult r = distill(teacher, train.features, cfg.method, spec, tc);
  write_model(ModelFile{model_kind(cfg.method), classes, {r.model}}, f.out);

  RunManifest m = base_manifest("distill", cfg);
  m.method = std::string(to_string(cfg.method));
  m.teacher = teacher_ref;
  m.temperature = cfg.temperature;
  m.seeds = {{"weights", seeds.student}, {"shuffle", seeds.student}};
  m.inputs = {teacher_ref, data_path};
  m.loss_history.push_back({"student", r.history});
  finish_manifest(m, f.out);
  return 0;
}

// ---- wrap -------------------------------------------------------------------

int cmd_wrap(const CommonFlags& f, const std::string& archive_path, bool binary) {
  require_file(archive_path, "archive");
  const LogitArchive a = read_archive(archive_path);
  if (binary && a.manifest.class_count != 2) {
    throw UsageError("--binary-interval requires a 2-class archive");
  }
  const std::size_t c = a.manifest.class_count;
  const std::vector<Matrix> raw = a.raw_members();
  std::ofstream out(f.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + f.out + " for writing");
  out << "index,label";
  for (const char* col : {"lower", "upper", "p_star"}) {
    for (std::size_t k = 0; k < c; ++k) out << ',' << col << k;
  }
  out << ",beta,tu,au,eu,measure,exact\n";
  std::vector<std::vector<double>> probs(raw.size());
  for (std::size_t i = 0; i < a.manifest.sample_count; ++i) {
    for (std::size_t m = 0; m < raw.size(); ++m) probs[m] = softmax(raw[m].row(i));
    const IntervalSystem is = wrap_ensemble(probs);
    const auto ip = intersection_probability(is);
    const UncertaintyTriple uq = binary ? binary_interval_triple(is) : decompose_uncertainty(is);
    out << i << ',' << a.labels[i];
    for (double v : is.lower) out << ',' << format_double(v);
    for (double v : is.upper) out << ',' << format_double(v);
    for (double v : ip.p_star) out << ',' << format_double(v);
    out << ',' << format_double(ip.beta) << ',' << format_double(uq.total) << ','
        << format_double(uq.aleatoric) << ',' << format_double(uq.epistemic) << ','
        << to_string(uq.measure) << ',' << (uq.exact ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + f.out);
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalFlags {
  std::string model, id, ood, id_archive, ood_archive, kind = "de_credal", name;
  bool binary = false;
};

int cmd_eval(const CommonFlags& f, const EvalFlags& e) {
  RunConfig cfg = resolve_config(f);
  const bool from_model = !e.model.empty();
  const bool from_archive = !e.id_archive.empty();
  if (from_model == from_archive) {
    throw UsageError("eval needs either --model with --id, or --id-archive");
  }
  PredictOptions popt;
  popt.binary_interval = e.binary || cfg.binary_interval;
  EvalOptions eopt;
  eopt.ece_bins = cfg.ece_bins;
  if (cfg.uncertainty) eopt.kinds = {*cfg.uncertainty};

  RunManifest m = base_manifest("eval", cfg);
  EvalReport report;
  if (from_model) {
    require_file(e.model, "model");
    if (e.id.empty()) throw UsageError("--model requires --id");
    require_file(e.id, "ID dataset");
    if (!e.ood.empty()) require_file(e.ood, "OOD dataset");
    const ModelFile model = read_model(e.model);
    const Dataset id = read_dataset_csv(e.id);
    if (!id.labeled()) throw UsageError("ID dataset contains unlabeled rows");
    const Dataset ood = e.ood.empty() ? Dataset{} : read_dataset_csv(e.ood);
    ModelFile scored = model;
    if (model.kind == ModelKind::de && e.kind == "de_credal") scored.kind = ModelKind::de_credal;
    eopt.model_name = e.name.empty() ? std::string(to_string(scored.kind)) : e.name;
    // Pairing errors are input errors: check them before any forward pass.
    for (auto k : eopt.kinds) {
      const auto measure = popt.binary_interval ? UncertaintyMeasure::binary_interval
                           : scored.kind == ModelKind::ed || scored.kind == ModelKind::snn
                               ? UncertaintyMeasure::shannon
                               : UncertaintyMeasure::credal_entropy;
      require_supported(scored.kind, measure, k);
    }
    report = evaluate_model(scored, id, ood, eopt, popt);
    m.inputs = {e.model, e.id};
    if (!e.ood.empty()) m.inputs.push_back(e.ood);
    m.teacher = manifest_path_for(e.model).string();
    m.method = std::string(to_string(scored.kind));
  } else {
    require_file(e.id_archive, "ID archive");
    if (!e.ood_archive.empty()) require_file(e.ood_archive, "OOD archive");
    const ModelKind kind = parse_model_kind(e.kind);
    if (kind != ModelKind::de && kind != ModelKind::de_credal) {
      throw UsageError("archives hold ensembles: --kind must be de or de_credal");
    }
    const LogitArchive id = read_archive(e.id_archive);
    std::optional<LogitArchive> ood;
    if (!e.ood_archive.empty()) {
      ood = read_archive(e.ood_archive);
      if (ood->manifest.class_count != id.manifest.class_count ||
          ood->manifest.member_count != id.manifest.member_count) {
        throw UsageError("ID and OOD archives disagree on class or member count");
      }
    }
    for (int y : id.labels) {
      if (y < 0) throw UsageError("ID archive contains unlabeled rows");
    }
    eopt.model = kind;
    eopt.model_name = e.name.empty() ? std::string(to_string(kind)) : e.name;
    const auto id_pred = predict_ensemble(id.raw_members(), kind, popt);
    std::vector<SamplePrediction> ood_pred;
    if (ood) ood_pred = predict_ensemble(ood->raw_members(), kind, popt);
    report = evaluate_predictions(id_pred, id.labels, ood_pred, eopt);
    m.inputs = {e.id_archive};
    if (ood) m.inputs.push_back(e.ood_archive);
    m.teacher = e.id_archive;
    m.method = std::string(to_string(kind));
  }

  const fs::path dir(f.out);
  fs::create_directories(dir);
  const fs::path report_csv = dir / "report.csv";
  const fs::path manifest = manifest_path_for(report_csv);
  write_report_csv(report, report_csv);
  write_summary(report, dir / "summary.txt", manifest.filename().string());
  write_samples_csv(report, dir / "samples.csv");
  write_ar_csv(report, dir / "ar_curve.csv");
  for (const char* extra : {"summary.txt", "samples.csv", "ar_curve.csv"}) {
    m.outputs.push_back((dir / extra).string());
  }
  finish_manifest(m, report_csv);
  std::ifstream summary(dir / "summary.txt");
  std::cout << summary.rdbuf();
  return 0;
}

// ---- oracle-check -------------------------------------------------------------

IntervalSystem random_system(std::size_t classes, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> members(1, 10);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<std::vector<double>> rows(members(rng));
  for (auto& r : rows) {
    r.resize(classes);
    double s = 0.0;
    for (double& v : r) s += v = gamma(rng) + 1e-12;
    for (double& v : r) v /= s;
  }
  return wrap_ensemble(rows);
}

int cmd_oracle_check(const CommonFlags& f, std::size_t classes, std::size_t cases, double step) {
  if (classes < 2 || classes > 4) throw UsageError("--classes must be in 2..4");
  if (cases == 0) throw UsageError("--cases must be >= 1");
  if (!(step >= 1e-4 && step <= 0.05)) throw UsageError("--step must be in [1e-4, 0.05]");
  const std::uint64_t seed = f.seed.value_or(0);
  std::mt19937_64 rng(seed);
  double max_upper = 0.0, max_lower = 0.0;
  const double tolerance = 2.0 * step * static_cast<double>(classes) * std::abs(std::log(step));
  for (std::size_t i = 0; i < cases; ++i) {
    const IntervalSystem is = random_system(classes, rng);
    const EntropyRange grid = grid_oracle_entropy_bounds(is, step);
    max_upper = std::max(max_upper, std::abs(upper_entropy(is).value - grid.max));
    max_lower = std::max(max_lower, std::abs(lower_entropy(is).value - grid.min));
  }
  const bool ok = max_upper <= tolerance && max_lower <= tolerance;
  std::ostringstream report;
  report << "classes: " << classes << "\ncases: " << cases << "\nstep: " << format_double(step)
         << "\nseed: " << seed << "\nmax_upper_deviation: " << format_double(max_upper)
         << "\nmax_lower_deviation: " << format_double(max_lower)
         << "\ntolerance: " << format_double(tolerance) << "\nresult: " << (ok ? "pass" : "fail")
         << '\n';
  std::cout << report.str();
  if (!f.out.empty()) {
    std::ofstream out(f.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + f.out + " for writing");
    out << report.str();
  }
  return ok ? 0 : 1;
}

std::string quote(std::string s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch == '\n' ? ' ' : ch;
  }
  return out;
}

int report_error(const std::string& code, const std::string& message, int exit_code) {
  std::cerr << "error: code=" << code << " message=\"" << quote(message) << "\"\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Credal ensemble distillation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kArtifactVersion);

  CommonFlags common;

  std::string split = "train", kind;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset CSV");
  add_common(gen, common);
  gen->add_option("--split", split, "train | test | ood")
      ->check(CLI::IsMember({"train", "test", "ood"}));
  gen->add_option("--kind", kind, "gaussians | two_moons | ood_cluster (overrides the split)");

  std::string data_path, archive_path, archive_data;
  auto* train = app.add_subcommand("train-ensemble", "train M softmax networks");
  add_common(train, common);
  train->add_option("--data", data_path, "labeled training CSV")->required();
  train->add_option("--members", common.members, "ensemble size M");
  train->add_option("--archive", archive_path, "also write member logits to this archive");
  train->add_option("--archive-data", archive_data,
                    "dataset whose logits go into --archive (default: --data)");

  std::string teacher_path, ensemble_path;
  auto* dist = app.add_subcommand("distill", "distill a student from an ensemble teacher");
  add_common(dist, common);
  dist->add_option("--method", common.method, "ed | edd | ced")
      ->check(CLI::IsMember({"ed", "edd", "ced"}));
  dist->add_option("--temperature", common.temperature, "distillation temperature T > 0");
  dist->add_option("--teacher", teacher_path, "teacher logit archive (.lga or .csv)");
  dist->add_option("--ensemble", ensemble_path, "teacher ensemble model file");
  dist->add_option("--data", data_path, "training inputs, row-aligned with the teacher")
      ->required();

  bool binary = false;
  auto* wrap = app.add_subcommand("wrap", "credal sets and uncertainty for an archive");
  add_common(wrap, common);
  wrap->add_option("--archive", archive_path, "logit archive")->required();
  wrap->add_flag("--binary-interval", binary, "two-class interval measures");

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "OOD detection, calibration and AR metrics");
  add_common(eval, common);
  eval->add_option("--model", ef.model, "model file");
  eval->add_option("--id", ef.id, "in-distribution dataset");
  eval->add_option("--ood", ef.ood, "out-of-distribution dataset");
  eval->add_option("--id-archive", ef.id_archive, "in-distribution logit archive");
  eval->add_option("--ood-archive", ef.ood_archive, "out-of-distribution logit archive");
  eval->add_option("--kind", ef.kind, "ensemble scoring: de | de_credal (default de_credal)")
      ->check(CLI::IsMember({"de", "de_credal"}));
  eval->add_option("--name", ef.name, "model name in the report");
  eval->add_option("--uncertainty", common.uncertainty, "eu | tu | au (default: all supported)")
      ->check(CLI::IsMember({"eu", "tu", "au"}));
  eval->add_flag("--binary-interval", ef.binary, "two-class interval measures");

  std::size_t oc_classes = 3, oc_cases = 1000;
  double oc_step = 0.005;
  auto* oracle = app.add_subcommand("oracle-check", "compare entropy solvers with a grid scan");
  add_common(oracle, common, false);
  oracle->add_option("--classes", oc_classes, "class count (2..4)");
  oracle->add_option("--cases", oc_cases, "random interval systems");
  oracle->add_option("--step", oc_step, "grid step in [1e-4, 0.05]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }

  try {
    if (*gen) return cmd_gen_data(common, split, kind);
    if (*train) return cmd_train_ensemble(common, data_path, archive_path, archive_data);
    if (*dist) return cmd_distill(common, teacher_path, ensemble_path, data_path);
    if (*wrap) return cmd_wrap(common, archive_path, binary);
    if (*eval) return cmd_eval(common, ef);
    if (*oracle) return cmd_oracle_check(common, oc_classes, oc_cases, oc_step);
  } catch (const UsageError& e) {
    return report_error("usage", e.what(), 2);
  } catch (const ArchiveError& e) {
    return report_error(std::string("archive.") + std::string(to_string(e.code())), e.what(), 2);
  } catch (const InputError& e) {
    return report_error("input", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error("runtime", e.what(), 1);
  }
  return 2;
}
