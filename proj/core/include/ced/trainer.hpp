#pragma once

// Training loops: standard networks on hard labels and students distilled
// from an ensemble teacher (ED / EDD / CED).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ced/autodiff.hpp"
#include "ced/dataset.hpp"
#include "ced/mlp.hpp"

namespace ced {

enum class OptimizerKind { adam, sgd };
enum class DistillMethod { ed, edd, ced };

std::string_view to_string(OptimizerKind o);
std::string_view to_string(DistillMethod m);
OptimizerKind parse_optimizer(std::string_view s);
DistillMethod parse_distill_method(std::string_view s);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::size_t lr_drop_epoch = 80;
  double lr_drop_factor = 0.1;
  double temperature = 1.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;  // data shuffling only; weights use MlpSpec::seed

  void validate() const;
};

struct TrainHistory {
  double initial_loss = 0.0;          // full-data loss before the first step
  std::vector<double> epoch_loss;     // mean batch loss per epoch
  std::vector<double> learning_rate;  // rate used in each epoch
};

struct TrainResult {
  Mlp model;
  TrainHistory history;
};

/// Adam (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) or plain SGD.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, std::vector<ad::Tensor*> params);
  void step(double learning_rate);

 private:
  OptimizerKind kind_;
  std::vector<ad::Tensor*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t t_ = 0;
};

/// Raw (unscaled) teacher logits: one N x C table per ensemble member, rows
/// aligned with the student's training inputs.
struct TeacherLogits {
  std::vector<Matrix> members;

  std::size_t member_count() const { return members.size(); }
  std::size_t sample_count() const { return members.empty() ? 0 : members.front().rows(); }
  std::size_t class_count() const { return members.empty() ? 0 : members.front().cols(); }
  void validate() const;
};

TeacherLogits teacher_logits(std::span<const Mlp> members, const Matrix& inputs);

// ---- batch losses (exposed for tests) -----------------------------------

/// Mean cross-entropy of softmax(logits) against hard labels.
ad::Var hard_label_loss(ad::Var logits, std::span<const int> labels);

/// T^2 * mean CE between the averaged softened teacher and softmax(z / T).
ad::Var ed_batch_loss(ad::Var logits, const TeacherLogits& teacher,
                      std::span<const std::size_t> rows, double temperature);

/// Mean negative Dirichlet log-likelihood of the softened member
/// distributions under alpha = exp(z). No T^2 factor.
ad::Var edd_batch_loss(ad::Var logits, const TeacherLogits& teacher,
                       std::span<const std::size_t> rows, double temperature);

/// T^2 * mean CED loss. Teacher labels (p*, delta, beta) come from
/// softmax(z_m / T) of each member; the student's first C logits are divided
/// by T, its delta and beta logits are not.
ad::Var ced_batch_loss(ad::Var logits, const TeacherLogits& teacher,
                       std::span<const std::size_t> rows, double temperature);

// ---- training ------------------------------------------------------------

TrainResult train_snn(const Dataset& data, const MlpSpec& spec, const TrainConfig& cfg);

/// Trains `members` networks; member m uses weight seed spec.seed + m and
/// shuffle seed cfg.seed + m. With threads > 1 members train concurrently;
/// the result does not depend on the thread count.
std::vector<TrainResult> train_ensemble(const Dataset& data, const MlpSpec& spec,
                                        const TrainConfig& cfg, std::size_t members,
                                        std::size_t threads = 1);

/// Student head width required by a distillation method.
std::size_t student_output_dim(DistillMethod method, std::size_t classes);

TrainResult distill(const TeacherLogits& teacher, const Matrix& inputs, DistillMethod method,
                    const MlpSpec& spec, const TrainConfig& cfg);
TrainResult distill(std::span<const Mlp> members, const Matrix& inputs, DistillMethod method,
                    const MlpSpec& spec, const TrainConfig& cfg);

}  // namespace ced
