#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ced/model_io.hpp"
#include "support.hpp"

namespace ced {
namespace {

namespace fs = std::filesystem;

Mlp make_net(std::size_t out, std::uint64_t seed, std::vector<std::size_t> hidden = {6, 5}) {
  MlpSpec s;
  s.hidden_dims = std::move(hidden);
  s.output_dim = out;
  s.activation = seed % 2 ? Activation::tanh : Activation::relu;
  s.seed = seed;
  return Mlp(s);
}

TEST(ModelIo, RoundTripPreservesOutputs) {
  testing::Rng rng(81);
  const Matrix x = testing::random_matrix(rng, 9, 2, 2.0);
  const fs::path path = fs::temp_directory_path() / "ced_model_rt.model";
  ModelFile de{ModelKind::de_credal, 3, {}};
  for (std::uint64_t m = 0; m < 3; ++m) de.networks.push_back(make_net(3, m));
  write_model(de, path);
  const ModelFile back = read_model(path);
  EXPECT_EQ(back.kind, ModelKind::de_credal);
  ASSERT_EQ(back.networks.size(), 3u);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_EQ(back.networks[m].spec(), de.networks[m].spec());
    EXPECT_EQ(back.networks[m].forward(x), de.networks[m].forward(x));
  }

  const ModelFile linear{ModelKind::ced, 2, {make_net(5, 4, {})}};
  write_model(linear, path);
  EXPECT_EQ(read_model(path).networks[0].forward(x), linear.networks[0].forward(x));
  fs::remove(path);
}

TEST(ModelIo, Validation) {
  EXPECT_THROW((ModelFile{ModelKind::ced, 3, {make_net(3, 0)}}.validate()), InputError);
  EXPECT_NO_THROW((ModelFile{ModelKind::ced, 3, {make_net(7, 0)}}.validate()));
  EXPECT_THROW((ModelFile{ModelKind::edd, 3, {make_net(3, 0), make_net(3, 1)}}.validate()),
               InputError);
  EXPECT_THROW((ModelFile{ModelKind::de, 3, {}}.validate()), InputError);
  EXPECT_THROW((ModelFile{ModelKind::de, 1, {make_net(1, 0)}}.validate()), InputError);
}

TEST(ModelIo, MalformedFiles) {
  const fs::path path = fs::temp_directory_path() / "ced_model_bad.model";
  EXPECT_THROW(read_model(path.string() + ".missing"), InputError);
  std::ofstream(path) << "CEDMODEL 2\n";
  EXPECT_THROW(read_model(path), InputError);
  write_model(ModelFile{ModelKind::snn, 2, {make_net(2, 3)}}, path);
  std::ifstream in(path);
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  in.close();
  std::ofstream(path) << text.substr(0, text.size() / 2);
  EXPECT_THROW(read_model(path), InputError);
  fs::remove(path);
}

TEST(ModelIo, ManifestRoundTrip) {
  RunManifest m;
  m.command = "distill";
  m.config = {{"temperature", "2.5"}, {"epochs", "3"}};
  m.seeds = {{"student", 1000}};
  m.method = "ced";
  m.teacher = "teacher.model";
  m.temperature = 2.5;
  m.inputs = {"train.csv"};
  m.outputs = {"student.model"};
  m.loss_history = {{"student", {1.5, {1.0, 0.5}, {1e-3, 1e-4}}}};
  m.started = utc_timestamp();
  m.finished = m.started;
  const fs::path path = manifest_path_for(fs::temp_directory_path() / "ced_student.model");
  EXPECT_EQ(path.filename(), "ced_student.model.manifest.json");
  write_manifest(m, path);
  const RunManifest b = read_manifest(path);
  EXPECT_EQ(b.command, m.command);
  EXPECT_EQ(b.config, m.config);
  EXPECT_EQ(b.seeds, m.seeds);
  EXPECT_EQ(b.temperature, m.temperature);
  EXPECT_EQ(b.outputs, m.outputs);
  ASSERT_EQ(b.loss_history.size(), 1u);
  EXPECT_EQ(b.loss_history[0].history.epoch_loss, m.loss_history[0].history.epoch_loss);
  EXPECT_EQ(b.started, m.started);
  EXPECT_EQ(b.artifact_version, kArtifactVersion);
  EXPECT_EQ(m.started.size(), 20u);

  std::ofstream(path) << "{\"command\": 3}";
  EXPECT_THROW(read_manifest(path), InputError);
  fs::remove(path);
}

}  // namespace
}  // namespace ced
