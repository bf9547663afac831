#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ced/config.hpp"

namespace ced {
namespace {

namespace fs = std::filesystem;

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

TEST(RunConfig, Defaults) {
  const RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.temperature, 2.5);
  EXPECT_EQ(c.members, 5u);
  EXPECT_EQ(c.method, DistillMethod::ced);
  EXPECT_EQ(c.hidden_dims, (std::vector<std::size_t>{64, 64}));
}

TEST(RunConfig, UnknownKeyIsAnError) {
  RunConfig c;
  try {
    c.set("temprature", "2.5");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown config key 'temprature'"), std::string::npos);
  }
  const fs::path p = write_temp("ced_cfg_unknown.cfg", "epochs = 3\nbogus = 1\n");
  try {
    load_config(p);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  fs::remove(p);
}

TEST(RunConfig, BadValuesNameTheKey) {
  RunConfig c;
  EXPECT_THROW(c.set("epochs", "-1"), InputError);
  EXPECT_THROW(c.set("epochs", "3x"), InputError);
  EXPECT_THROW(c.set("activation", "gelu"), InputError);
  EXPECT_THROW(c.set("binary_interval", "maybe"), InputError);
  try {
    c.set("sigma", "abc");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("sigma"), std::string::npos);
  }
}

TEST(RunConfig, FileParsingAndSnapshot) {
  const fs::path p = write_temp("ced_cfg_ok.cfg",
                                "# comment\n\n  separation = 10.5\nhidden_dims = 8, 4\n"
                                "uncertainty = eu\nmethod = edd\nseed=42\n");
  const RunConfig c = load_config(p);
  fs::remove(p);
  EXPECT_EQ(c.separation, 10.5);
  EXPECT_EQ(c.hidden_dims, (std::vector<std::size_t>{8, 4}));
  EXPECT_EQ(c.uncertainty, UncertaintyKind::eu);
  EXPECT_EQ(c.method, DistillMethod::edd);
  EXPECT_EQ(c.seed, 42u);

  const auto snap = c.snapshot();
  ASSERT_EQ(snap.size(), config_keys().size());
  for (std::size_t i = 0; i < snap.size(); ++i) EXPECT_EQ(snap[i].first, config_keys()[i]);
  RunConfig back;
  for (const auto& [k, v] : snap) back.set(k, v);
  EXPECT_EQ(back.snapshot(), snap);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.binary_interval = true;
  EXPECT_THROW(c.validate(), InputError);
  c.classes = 2;
  EXPECT_NO_THROW(c.validate());
  c.members = 0;
  EXPECT_THROW(c.validate(), InputError);
  EXPECT_THROW(load_config("/nonexistent/ced.cfg"), InputError);
}

TEST(RunConfig, Derivations) {
  RunConfig c;
  c.set("epochs", "7");
  c.set("hidden_dims", "5");
  const TrainConfig t = c.train_config();
  EXPECT_EQ(t.epochs, 7u);
  EXPECT_EQ(t.temperature, 2.5);
  const MlpSpec s = c.mlp_spec(2, 7, 99);
  EXPECT_EQ(s.hidden_dims, (std::vector<std::size_t>{5}));
  EXPECT_EQ(s.seed, 99u);
  const SyntheticParams sp = c.synthetic(SyntheticKind::ood_cluster, 10, 3);
  EXPECT_EQ(sp.kind, SyntheticKind::ood_cluster);
  EXPECT_EQ(sp.samples, 10u);
}

}  // namespace
}  // namespace ced
