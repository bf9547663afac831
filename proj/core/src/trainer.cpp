#include "ced/trainer.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include "ced/credal.hpp"
#include "ced/heads.hpp"
#include "ced/numeric.hpp"

namespace ced {

std::string_view to_string(OptimizerKind o) { return o == OptimizerKind::adam ? "adam" : "sgd"; }

std::string_view to_string(DistillMethod m) {
  switch (m) {
    case DistillMethod::ed: return "ed";
    case DistillMethod::edd: return "edd";
    case DistillMethod::ced: return "ced";
  }
  return "unknown";
}

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw InputError("unknown optimizer '" + std::string(s) + "' (expected adam|sgd)");
}

DistillMethod parse_distill_method(std::string_view s) {
  if (s == "ed") return DistillMethod::ed;
  if (s == "edd") return DistillMethod::edd;
  if (s == "ced") return DistillMethod::ced;
  throw InputError("unknown method '" + std::string(s) + "' (expected ed|edd|ced)");
}

void TrainConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InputError("TrainConfig: temperature must be > 0");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InputError("TrainConfig: learning_rate must be > 0");
  }
  if (batch_size == 0) throw InputError("TrainConfig: batch_size must be >= 1");
  if (!(lr_drop_factor > 0.0)) throw InputError("TrainConfig: lr_drop_factor must be > 0");
}

Optimizer::Optimizer(OptimizerKind kind, std::vector<ad::Tensor*> params)
    : kind_(kind), params_(std::move(params)) {
  if (kind_ == OptimizerKind::adam) {
    for (auto* p : params_) {
      m_.emplace_back(p->size(), 0.0);
      v_.emplace_back(p->size(), 0.0);
    }
  }
}

void Optimizer::step(double learning_rate) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ad::Tensor& p = *params_[i];
    if (!p.grad) continue;
    const auto& g = *p.grad;
    if (kind_ == OptimizerKind::sgd) {
      for (std::size_t j = 0; j < p.size(); ++j) p.values[j] -= learning_rate * g[j];
      continue;
    }
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      p.values[j] -= learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
    }
  }
}

void TeacherLogits::validate() const {
  if (members.empty()) throw InputError("teacher: no members");
  for (const auto& m : members) {
    if (m.rows() != sample_count() || m.cols() != class_count()) {
      throw InputError("teacher: member tables disagree in shape");
    }
  }
  if (class_count() < 2) throw InputError("teacher: need at least 2 classes");
}

TeacherLogits teacher_logits(std::span<const Mlp> members, const Matrix& inputs) {
  TeacherLogits out;
  for (const auto& m : members) out.members.push_back(m.forward(inputs));
  out.validate();
  return out;
}

namespace {

// Softened member distributions for one row: M vectors of length C.
std::vector<std::vector<double>> member_softmax(const TeacherLogits& teacher, std::size_t row,
                                                double temperature) {
  std::vector<std::vector<double>> out;
  out.reserve(teacher.member_count());
  for (const auto& m : teacher.members) out.push_back(softmax(m.row(row), temperature));
  return out;
}

void check_rows(const ad::Var& logits, std::span<const std::size_t> rows,
                std::size_t expected_cols, const TeacherLogits& teacher, const char* name) {
  if (logits.rows() != rows.size()) {
    throw InputError(std::string(name) + ": batch rows do not match logits");
  }
  if (logits.cols() != expected_cols) {
    throw InputError(std::string(name) + ": student width " + std::to_string(logits.cols()) +
                     " does not match expected " + std::to_string(expected_cols));
  }
  for (std::size_t r : rows) {
    if (r >= teacher.sample_count()) throw InputError(std::string(name) + ": row out of range");
  }
}

}  // namespace

ad::Var hard_label_loss(ad::Var logits, std::span<const int> labels) {
  const std::size_t n = logits.rows(), c = logits.cols();
  if (labels.size() != n) throw InputError("hard_label_loss: label count mismatch");
  ad::Tensor onehot(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw InputError("hard_label_loss: label out of range");
    }
    onehot.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  ad::Tape& t = *logits.tape();
  ad::Var logp = ad::log_clamped(ad::softmax_rows(logits), kLogClamp);
  ad::Var ce = ad::sum_all(ad::mul(logp, t.constant(std::move(onehot))));
  return ad::scale(ce, -1.0 / static_cast<double>(n));
}

ad::Var ed_batch_loss(ad::Var logits, const TeacherLogits& teacher,
                      std::span<const std::size_t> rows, double temperature) {
  const std::size_t c = teacher.class_count();
  check_rows(logits, rows, c, teacher, "ed_batch_loss");
  ad::Tensor target(rows.size(), c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ProbVector mean = de_average(member_softmax(teacher, rows[i], temperature));
    for (std::size_t k = 0; k < c; ++k) target.at(i, k) = mean[k];
  }
  ad::Tape& t = *logits.tape();
  ad::Var logp =
      ad::log_clamped(ad::softmax_rows(ad::scale(logits, 1.0 / temperature)), kLogClamp);
  ad::Var ce = ad::sum_all(ad::mul(logp, t.constant(std::move(target))));
  return ad::scale(ce, -temperature * temperature / static_cast<double>(rows.size()));
}

ad::Var edd_batch_loss(ad::Var logits, const TeacherLogits& teacher,
                       std::span<const std::size_t> rows, double temperature) {
  const std::size_t c = teacher.class_count();
  check_rows(logits, rows, c, teacher, "edd_batch_loss");
  for (double z : logits.value().values) {
    if (z > kExpOverflowLogit) {
      throw InputError("edd_batch_loss: student logit " + std::to_string(z) +
                       " overflows exp(); lower the learning rate or rescale the head");
    }
  }
  ad::Tensor mean_log(rows.size(), c);
  const double inv_m = 1.0 / static_cast<double>(teacher.member_count());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& p : member_softmax(teacher, rows[i], temperature)) {
      for (std::size_t k = 0; k < c; ++k) {
        mean_log.at(i, k) += std::log(std::max(p[k], kLogClamp)) * inv_m;
      }
    }
  }
  ad::Tape& t = *logits.tape();
  ad::Var alpha = ad::exp(logits);
  ad::Var norm = ad::sum_all(ad::lgamma(ad::sum_rows(alpha)));
  ad::Var parts = ad::sum_all(ad::lgamma(alpha));
  ad::Var fit = ad::sum_all(ad::mul(ad::add_scalar(alpha, -1.0), t.constant(std::move(mean_log))));
  ad::Var negloglik = ad::sub(ad::sub(parts, norm), fit);
  return ad::scale(negloglik, 1.0 / static_cast<double>(rows.size()));
}

ad::Var ced_batch_loss(ad::Var logits, const TeacherLogits& teacher,
                       std::span<const std::size_t> rows, double temperature) {
  const std::size_t c = teacher.class_count();
  check_rows(logits, rows, c * 2 + 1, teacher, "ced_batch_loss");
  const std::size_t n = rows.size();
  ad::Tensor p_star(n, c), delta(n, c), beta(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto members = member_softmax(teacher, rows[i], temperature);
    const CredalPrediction label = credal_label(wrap_ensemble(members));
    for (std::size_t k = 0; k < c; ++k) {
      p_star.at(i, k) = label.p_star()[k];
      delta.at(i, k) = label.delta()[k];
    }
    beta.at(i, 0) = label.beta();
  }
  ad::Tape& t = *logits.tape();
  ad::Var student_p =
      ad::softmax_rows(ad::scale(ad::slice_cols(logits, 0, c), 1.0 / temperature));
  ad::Var student_delta = ad::sigmoid(ad::slice_cols(logits, c, 2 * c));
  ad::Var student_beta = ad::sigmoid(ad::slice_cols(logits, 2 * c, 2 * c + 1));
#ifndef NDEBUG
  for (double v : student_delta.value().values) assert(v >= 0.0 && v <= 1.0);
  for (double v : student_beta.value().values) assert(v >= 0.0 && v <= 1.0);
#endif
  ad::Var ce = ad::scale(
      ad::sum_all(ad::mul(ad::log_clamped(student_p, kLogClamp), t.constant(std::move(p_star)))),
      -1.0);
  ad::Var reg_delta = ad::sum_all(ad::square(ad::sub(t.constant(std::move(delta)), student_delta)));
  ad::Var reg_beta = ad::sum_all(ad::square(ad::sub(t.constant(std::move(beta)), student_beta)));
  ad::Var total = ad::add(ad::add(ce, reg_delta), reg_beta);
  return ad::scale(total, temperature * temperature / static_cast<double>(n));
}

namespace {

using BatchLoss = std::function<ad::Var(ad::Var logits, std::span<const std::size_t> rows)>;

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), out.row(i).begin());
  }
  return out;
}

double full_loss(Mlp& model, const Matrix& inputs, const BatchLoss& loss) {
  std::vector<std::size_t> all(inputs.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  ad::Tape tape;
  ad::Var logits = model.forward(tape, tape.constant(inputs));
  return loss(logits, all).scalar();
}

TrainResult run_training(Mlp model, const Matrix& inputs, const TrainConfig& cfg,
                         const BatchLoss& loss) {
  cfg.validate();
  const std::size_t n = inputs.rows();
  if (n == 0) throw InputError("training data is empty");

  TrainHistory history;
  history.initial_loss = full_loss(model, inputs, loss);

  Optimizer opt(cfg.optimizer, model.parameters());
  std::mt19937_64 shuffle_rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr =
        epoch >= cfg.lr_drop_epoch ? cfg.learning_rate * cfg.lr_drop_factor : cfg.learning_rate;
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::vector<double> batch_losses;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      ad::Tape tape;
      ad::Var logits = model.forward(tape, tape.constant(gather_rows(inputs, rows)));
      ad::Var l = loss(logits, rows);
      tape.backward(l);
      opt.step(lr);
      model.zero_grad();
      batch_losses.push_back(l.scalar());
    }
    history.epoch_loss.push_back(compensated_mean(batch_losses));
    history.learning_rate.push_back(lr);
  }
  return {std::move(model), std::move(history)};
}

}  // namespace

TrainResult train_snn(const Dataset& data, const MlpSpec& spec, const TrainConfig& cfg) {
  if (data.size() == 0) throw InputError("train_snn: dataset is empty");
  data.validate();
  if (!data.labeled()) throw InputError("train_snn: dataset contains unlabeled rows");
  if (spec.input_dim != data.dim()) throw InputError("train_snn: input_dim does not match data");
  if (spec.output_dim != data.class_count) {
    throw InputError("train_snn: output_dim " + std::to_string(spec.output_dim) +
                     " does not match class_count " + std::to_string(data.class_count));
  }
  const std::vector<int>& labels = data.labels;
  BatchLoss loss = [&labels](ad::Var logits, std::span<const std::size_t> rows) {
    std::vector<int> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) y[i] = labels[rows[i]];
    return hard_label_loss(logits, y);
  };
  return run_training(Mlp(spec), data.features, cfg, loss);
}

std::vector<TrainResult> train_ensemble(const Dataset& data, const MlpSpec& spec,
                                        const TrainConfig& cfg, std::size_t members,
                                        std::size_t threads) {
  if (members == 0) throw InputError("train_ensemble: need at least one member");
  std::vector<std::optional<TrainResult>> slots(members);
  std::vector<std::exception_ptr> errors(members);
  auto train_member = [&](std::size_t m) {
    try {
      MlpSpec s = spec;
      s.seed = spec.seed + m;
      TrainConfig c = cfg;
      c.seed = cfg.seed + m;
      slots[m].emplace(train_snn(data, s, c));
    } catch (...) {
      errors[m] = std::current_exception();
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, members);
  if (workers == 1) {
    for (std::size_t m = 0; m < members; ++m) train_member(m);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t m = w; m < members; m += workers) train_member(m);
      });
    }
  }
  std::vector<TrainResult> out;
  for (std::size_t m = 0; m < members; ++m) {
    if (errors[m]) std::rethrow_exception(errors[m]);
    out.push_back(std::move(*slots[m]));
  }
  return out;
}

std::size_t student_output_dim(DistillMethod method, std::size_t classes) {
  return method == DistillMethod::ced ? 2 * classes + 1 : classes;
}

TrainResult distill(const TeacherLogits& teacher, const Matrix& inputs, DistillMethod method,
                    const MlpSpec& spec, const TrainConfig& cfg) {
  teacher.validate();
  cfg.validate();
  if (teacher.sample_count() != inputs.rows()) {
    throw InputError("distill: teacher has " + std::to_string(teacher.sample_count()) +
                     " rows but inputs have " + std::to_string(inputs.rows()));
  }
  if (spec.input_dim != inputs.cols()) throw InputError("distill: input_dim does not match data");
  const std::size_t want = student_output_dim(method, teacher.class_count());
  if (spec.output_dim != want) {
    throw InputError("distill: method " + std::string(to_string(method)) + " needs a head of width " +
                     std::to_string(want) + ", got " + std::to_string(spec.output_dim));
  }
  const double temp = cfg.temperature;
  BatchLoss loss;
  switch (method) {
    case DistillMethod::ed:
      loss = [&teacher, temp](ad::Var z, std::span<const std::size_t> rows) {
        return ed_batch_loss(z, teacher, rows, temp);
      };
      break;
    case DistillMethod::edd:
      loss = [&teacher, temp](ad::Var z, std::span<const std::size_t> rows) {
        return edd_batch_loss(z, teacher, rows, temp);
      };
      break;
    case DistillMethod::ced:
      loss = [&teacher, temp](ad::Var z, std::span<const std::size_t> rows) {
        return ced_batch_loss(z, teacher, rows, temp);
      };
      break;
  }
  return run_training(Mlp(spec), inputs, cfg, loss);
}

TrainResult distill(std::span<const Mlp> members, const Matrix& inputs, DistillMethod method,
                    const MlpSpec& spec, const TrainConfig& cfg) {
  return distill(teacher_logits(members, inputs), inputs, method, spec, cfg);
}

}  // namespace ced
