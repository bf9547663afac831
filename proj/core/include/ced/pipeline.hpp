#pragma once

// The synthetic end-to-end run: Gaussian mixture data, an SNN ensemble
// teacher, a distilled student and OOD evaluation against a shifted cluster.

#include <cstdint>
#include <vector>

#include "ced/config.hpp"
#include "ced/dataset.hpp"
#include "ced/evaluate.hpp"
#include "ced/model_io.hpp"
#include "ced/trainer.hpp"

namespace ced {

struct PipelineSeeds {
  std::uint64_t train_data, test_data, ood_data, teacher, student;
};

/// train/test/OOD data seeds are seed, seed+1, seed+2; member m uses weight
/// and shuffle seed `seed + 100 + m`; the student uses `seed + 1000`.
PipelineSeeds pipeline_seeds(std::uint64_t seed);

struct PipelineData {
  Dataset train, test, ood;
};

PipelineData make_pipeline_data(const RunConfig& cfg);

struct Teacher {
  std::vector<Mlp> members;
  std::vector<TrainHistory> histories;
};

Teacher train_teacher(const RunConfig& cfg, const Dataset& train);

TrainResult train_student(const RunConfig& cfg, const Teacher& teacher, const Dataset& train,
                          DistillMethod method, double temperature);

ModelKind model_kind(DistillMethod m);

/// Scores a saved model (ensemble or student) on ID and OOD data.
EvalReport evaluate_model(const ModelFile& model, const Dataset& id, const Dataset& ood,
                          const EvalOptions& opt, const PredictOptions& popt = {});

}  // namespace ced
