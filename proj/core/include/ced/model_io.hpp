#pragma once

// Trained-model files and run manifests.
//
// A model file is text: "CEDMODEL 1", `key = value` lines (kind, classes,
// networks), then per network its spec and every layer's weight and bias rows
// with 17 significant digits, and a closing "end". A de / de_credal file holds
// every ensemble member; student files hold one network.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ced/evaluate.hpp"
#include "ced/mlp.hpp"
#include "ced/trainer.hpp"

namespace ced {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct ModelFile {
  ModelKind kind = ModelKind::ced;
  std::size_t classes = 0;
  std::vector<Mlp> networks;

  void validate() const;
};

void write_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile read_model(const std::filesystem::path& path);

struct LossHistory {
  std::string name;
  TrainHistory history;
};

struct RunManifest {
  std::string command;
  std::string artifact_version = kArtifactVersion;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::string method;
  std::string teacher;  // path or description of the teacher
  std::optional<double> temperature;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<LossHistory> loss_history;
  std::string started;   // ISO-8601 UTC
  std::string finished;
};

std::string utc_timestamp();

/// `<file>.manifest.json` next to an output file.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

void write_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace ced
