#include "ced/pipeline.hpp"

namespace ced {

PipelineSeeds pipeline_seeds(std::uint64_t seed) {
  return {seed, seed + 1, seed + 2, seed + 100, seed + 1000};
}

PipelineData make_pipeline_data(const RunConfig& cfg) {
  cfg.validate();
  const PipelineSeeds s = pipeline_seeds(cfg.seed);
  PipelineData d;
  d.train = gen_synthetic(cfg.synthetic(cfg.dataset, cfg.train_samples, s.train_data));
  d.test = gen_synthetic(cfg.synthetic(cfg.dataset, cfg.test_samples, s.test_data));
  d.ood = gen_synthetic(cfg.synthetic(SyntheticKind::ood_cluster, cfg.ood_samples, s.ood_data));
  return d;
}

Teacher train_teacher(const RunConfig& cfg, const Dataset& train) {
  const PipelineSeeds s = pipeline_seeds(cfg.seed);
  TrainConfig tc = cfg.train_config();
  tc.seed = s.teacher;
  auto results = train_ensemble(train, cfg.mlp_spec(train.dim(), train.class_count, s.teacher), tc,
                                cfg.members, cfg.threads);
  Teacher t;
  for (auto& r : results) {
    t.members.push_back(std::move(r.model));
    t.histories.push_back(std::move(r.history));
  }
  return t;
}

TrainResult train_student(const RunConfig& cfg, const Teacher& teacher, const Dataset& train,
                          DistillMethod method, double temperature) {
  const PipelineSeeds s = pipeline_seeds(cfg.seed);
  TrainConfig tc = cfg.train_config();
  tc.seed = s.student;
  tc.temperature = temperature;
  const MlpSpec spec =
      cfg.mlp_spec(train.dim(), student_output_dim(method, train.class_count), s.student);
  return distill(teacher.members, train.features, method, spec, tc);
}

ModelKind model_kind(DistillMethod m) {
  switch (m) {
    case DistillMethod::ed: return ModelKind::ed;
    case DistillMethod::edd: return ModelKind::edd;
    case DistillMethod::ced: return ModelKind::ced;
  }
  return ModelKind::ced;
}

namespace {

std::vector<SamplePrediction> predict(const ModelFile& model, const Matrix& x,
                                      const PredictOptions& popt) {
  if (model.kind == ModelKind::de || model.kind == ModelKind::de_credal) {
    std::vector<Matrix> logits;
    for (const auto& n : model.networks) logits.push_back(n.forward(x));
    return predict_ensemble(logits, model.kind, popt);
  }
  return predict_single(model.networks.front().forward(x), model.classes, model.kind, popt);
}

}  // namespace

EvalReport evaluate_model(const ModelFile& model, const Dataset& id, const Dataset& ood,
                          const EvalOptions& opt, const PredictOptions& popt) {
  model.validate();
  const auto id_pred = predict(model, id.features, popt);
  std::vector<SamplePrediction> ood_pred;
  if (ood.size() > 0) ood_pred = predict(model, ood.features, popt);
  EvalOptions o = opt;
  o.model = model.kind;
  return evaluate_predictions(id_pred, id.labels, ood_pred, o);
}

}  // namespace ced
