#pragma once

// Run configuration: a flat text file of `key = value` lines. Blank lines and
// lines starting with '#' are ignored; unknown keys are errors.
//
// Keys (defaults in parentheses):
//   dataset (gaussians)  classes (3)  train_samples (1500)  test_samples (1500)
//   ood_samples (1500)  sigma (1)  separation (6)  noise (0.1)  ood_distance (6)
//   hidden_dims (64,64)  activation (relu)
//   epochs (100)  batch_size (64)  learning_rate (0.001)  lr_drop_epoch (80)
//   lr_drop_factor (0.1)  optimizer (adam)  temperature (2.5)
//   members (5)  threads (1)  method (ced)  seed (0)
//   uncertainty (all supported)  ece_bins (15)  binary_interval (false)

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ced/evaluate.hpp"
#include "ced/mlp.hpp"
#include "ced/synthetic.hpp"
#include "ced/trainer.hpp"

namespace ced {

struct RunConfig {
  SyntheticKind dataset = SyntheticKind::gaussians;
  std::size_t classes = 3;
  std::size_t train_samples = 1500;
  std::size_t test_samples = 1500;
  std::size_t ood_samples = 1500;
  double sigma = 1.0;
  double separation = 6.0;
  double noise = 0.1;
  double ood_distance = 6.0;

  std::vector<std::size_t> hidden_dims{64, 64};
  Activation activation = Activation::relu;

  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::size_t lr_drop_epoch = 80;
  double lr_drop_factor = 0.1;
  OptimizerKind optimizer = OptimizerKind::adam;
  double temperature = 2.5;

  std::size_t members = 5;
  std::size_t threads = 1;
  DistillMethod method = DistillMethod::ced;
  std::uint64_t seed = 0;

  std::optional<UncertaintyKind> uncertainty;
  std::size_t ece_bins = kDefaultEceBins;
  bool binary_interval = false;

  /// Sets one key from its text value. Throws InputError naming the key.
  void set(const std::string& key, const std::string& value);

  /// Every key with its current value, in documentation order.
  std::vector<std::pair<std::string, std::string>> snapshot() const;

  void validate() const;

  TrainConfig train_config() const;
  MlpSpec mlp_spec(std::size_t input_dim, std::size_t output_dim, std::uint64_t seed) const;
  SyntheticParams synthetic(SyntheticKind kind, std::size_t samples, std::uint64_t seed) const;
};

const std::vector<std::string>& config_keys();

RunConfig load_config(const std::filesystem::path& path);

/// Applies `path` on top of an existing configuration.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

}  // namespace ced
