#include <gtest/gtest.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ced/archive.hpp"
#include "ced/evaluate.hpp"
#include "support.hpp"

namespace ced {
namespace {

namespace fs = std::filesystem;

class ArchiveTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ced_archive_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  static LogitArchive random_archive(std::uint64_t seed, std::size_t m, std::size_t n,
                                     std::size_t c) {
    testing::Rng rng(seed);
    LogitArchive a;
    a.manifest.class_count = c;
    a.manifest.member_count = m;
    a.manifest.sample_count = n;
    for (std::size_t k = 0; k < m; ++k) a.members.push_back(testing::random_matrix(rng, n, c, 3.0));
    std::uniform_int_distribution<int> lab(-1, static_cast<int>(c) - 1);
    for (std::size_t i = 0; i < n; ++i) a.labels.push_back(lab(rng));
    return a;
  }

  static std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  static void write_bytes(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
  }

  static ArchiveErrc code_of(const fs::path& p, std::string* what = nullptr) {
    try {
      read_archive(p);
    } catch (const ArchiveError& e) {
      if (what) *what = e.what();
      return e.code();
    }
    ADD_FAILURE() << "expected an ArchiveError";
    return ArchiveErrc::io_error;
  }

  fs::path dir_;
};

bool bitwise_equal(const LogitArchive& a, const LogitArchive& b) {
  if (!(a.manifest == b.manifest) || a.labels != b.labels || a.members.size() != b.members.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.members.size(); ++k) {
    const auto& x = a.members[k].data();
    const auto& y = b.members[k].data();
    if (x.size() != y.size() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

TEST_F(ArchiveTest, BinaryRoundTripIsBitExact) {
  LogitArchive a = random_archive(1, 5, 37, 4);
  a.members[2](3, 1) = -0.0;
  a.members[0](0, 0) = 1e-310;
  a.manifest.prescaled_temperature = 2.5;
  a.manifest.split = "ood";
  write_archive(a, path("a.lga"));
  EXPECT_TRUE(bitwise_equal(read_archive(path("a.lga")), a));
}

TEST_F(ArchiveTest, CsvRoundTripIsBitExact) {
  for (std::uint64_t seed = 2; seed < 12; ++seed) {
    const LogitArchive a = random_archive(seed, 1 + seed % 4, 20, 2 + seed % 3);
    write_archive(a, path("a.csv"));
    const LogitArchive b = read_archive(path("a.csv"));
    EXPECT_TRUE(bitwise_equal(a, b)) << seed;
    write_archive(b, path("b.csv"));
    EXPECT_EQ(read_bytes(path("a.csv")), read_bytes(path("b.csv")));
  }
}

TEST_F(ArchiveTest, WritingTwiceIsByteIdentical) {
  const LogitArchive a = random_archive(3, 3, 10, 3);
  write_archive(a, path("x.lga"));
  write_archive(a, path("y.lga"));
  EXPECT_EQ(read_bytes(path("x.lga")), read_bytes(path("y.lga")));
  EXPECT_TRUE(is_csv_path("a.CSV"));
  EXPECT_FALSE(is_csv_path("a.lga"));
}

TEST_F(ArchiveTest, MemberCountMismatch) {
  LogitArchive a = random_archive(4, 4, 6, 3);
  a.manifest.member_count = 5;
  try {
    a.validate();
    FAIL();
  } catch (const ArchiveError& e) {
    EXPECT_EQ(e.code(), ArchiveErrc::member_count_mismatch);
    EXPECT_NE(std::string(e.what()).find("member count mismatch"), std::string::npos);
  }
  EXPECT_THROW(write_archive(a, path("bad.lga")), ArchiveError);

  a.manifest.member_count = 4;
  write_archive(a, path("ok.lga"));
  std::string bytes = read_bytes(path("ok.lga"));
  const auto pos = bytes.find("member_count = 4");
  ASSERT_NE(pos, std::string::npos);
  bytes[pos + 15] = '5';
  write_bytes(path("bad.lga"), bytes);
  std::string what;
  EXPECT_EQ(code_of(path("bad.lga"), &what), ArchiveErrc::member_count_mismatch);
  EXPECT_NE(what.find("member count mismatch"), std::string::npos);

  write_archive(a, path("ok.csv"));
  std::string text = read_bytes(path("ok.csv"));
  text.replace(text.find("member_count = 4"), 16, "member_count = 5");
  write_bytes(path("bad.csv"), text);
  EXPECT_EQ(code_of(path("bad.csv")), ArchiveErrc::member_count_mismatch);
}

TEST_F(ArchiveTest, NonFiniteValue) {
  LogitArchive a = random_archive(5, 2, 5, 3);
  a.members[1](2, 0) = 12345.5;
  write_archive(a, path("a.lga"));
  std::string bytes = read_bytes(path("a.lga"));
  const auto marker = std::bit_cast<std::array<char, 8>>(12345.5);
  const auto pos = bytes.find(std::string(marker.begin(), marker.end()));
  ASSERT_NE(pos, std::string::npos);
  const auto nan = std::bit_cast<std::array<char, 8>>(std::numeric_limits<double>::quiet_NaN());
  std::copy(nan.begin(), nan.end(), bytes.begin() + static_cast<std::ptrdiff_t>(pos));
  write_bytes(path("nan.lga"), bytes);
  std::string what;
  EXPECT_EQ(code_of(path("nan.lga"), &what), ArchiveErrc::non_finite);
  EXPECT_EQ(what, "non-finite value at (member 1, row 2, col 0)");

  write_archive(a, path("a.csv"));
  std::string text = read_bytes(path("a.csv"));
  text.replace(text.find("12345.5"), 7, "nan");
  write_bytes(path("nan.csv"), text);
  EXPECT_EQ(code_of(path("nan.csv"), &what), ArchiveErrc::non_finite);
  EXPECT_EQ(what, "non-finite value at (member 1, row 2, col 0)");

  a.members[0](0, 0) = INFINITY;
  EXPECT_THROW(write_archive(a, path("inf.lga")), ArchiveError);
}

TEST_F(ArchiveTest, TruncatedInput) {
  const LogitArchive a = random_archive(6, 2, 8, 3);
  write_archive(a, path("a.lga"));
  const std::string bytes = read_bytes(path("a.lga"));
  for (std::size_t cut : {std::size_t{5}, std::size_t{8}, bytes.size() / 2, bytes.size() - 20}) {
    write_bytes(path("t.lga"), bytes.substr(0, bytes.size() - cut));
    EXPECT_EQ(code_of(path("t.lga")), ArchiveErrc::truncated) << cut;
  }
  write_bytes(path("h.lga"), bytes.substr(0, 12));
  EXPECT_EQ(code_of(path("h.lga")), ArchiveErrc::truncated);

  write_archive(a, path("a.csv"));
  std::string text = read_bytes(path("a.csv"));
  text = text.substr(0, text.rfind(','));
  write_bytes(path("t.csv"), text + "\n");
  EXPECT_EQ(code_of(path("t.csv")), ArchiveErrc::truncated);
}

TEST_F(ArchiveTest, SchemaViolations) {
  write_bytes(path("junk.lga"), "NOTANARCHIVE\n");
  EXPECT_EQ(code_of(path("junk.lga")), ArchiveErrc::bad_header);
  EXPECT_EQ(code_of(path("missing.lga")), ArchiveErrc::io_error);

  LogitArchive a = random_archive(7, 1, 3, 2);
  a.labels[1] = 2;
  EXPECT_THROW(write_archive(a, path("l.lga")), ArchiveError);
  a.labels[1] = -2;
  try {
    a.validate();
    FAIL();
  } catch (const ArchiveError& e) {
    EXPECT_EQ(e.code(), ArchiveErrc::label_out_of_range);
  }

  write_bytes(path("k.csv"), "# class_count = 2\n# member_count = 1\n# sample_count = 1\n"
                             "# colour = red\nlabel,m0_c0,m0_c1\n0,1,2\n");
  EXPECT_EQ(code_of(path("k.csv")), ArchiveErrc::bad_header);
  write_bytes(path("c.csv"), "# class_count = 3\n# member_count = 1\n# sample_count = 1\n"
                             "label,m0_c0,m0_c1\n0,1,2\n");
  EXPECT_EQ(code_of(path("c.csv")), ArchiveErrc::class_count_mismatch);
  write_bytes(path("n.csv"), "# class_count = 2\n# member_count = 1\n# sample_count = 2\n"
                             "label,m0_c0,m0_c1\n0,1,2\n");
  EXPECT_EQ(code_of(path("n.csv")), ArchiveErrc::sample_count_mismatch);
  write_bytes(path("o.csv"), "# class_count = 2\n# member_count = 1\n# sample_count = 1\n"
                             "label,m0_c1,m0_c0\n0,1,2\n");
  EXPECT_EQ(code_of(path("o.csv")), ArchiveErrc::bad_table);
  write_bytes(path("v.csv"), "# class_count = 2\n# member_count = 1\n# sample_count = 1\n"
                             "label,m0_c0,m0_c1\n0,1,abc\n");
  EXPECT_EQ(code_of(path("v.csv")), ArchiveErrc::bad_table);
}

TEST_F(ArchiveTest, PrescaledTemperatureIsUndone) {
  LogitArchive a = random_archive(8, 2, 4, 2);
  a.manifest.prescaled_temperature = 2.0;
  const auto raw = a.raw_members();
  EXPECT_EQ(raw[1](3, 1), 2.0 * a.members[1](3, 1));
}

TEST_F(ArchiveTest, ExporterFixtureWrapsToZeroEpistemic) {
  const fs::path fixture = fs::path(CED_FIXTURE_DIR) / "constant_member.csv";
  const LogitArchive a = read_archive(fixture);
  EXPECT_EQ(a.manifest.member_count, 1u);
  EXPECT_EQ(a.manifest.sample_count, 10u);
  EXPECT_EQ(a.manifest.creator, "ced-export 0.1.0");
  EXPECT_EQ(a.members[0](4, 1), -1.5);
  const auto pred = predict_ensemble(a.raw_members(), ModelKind::de_credal);
  for (const auto& p : pred) EXPECT_EQ(p.uq.epistemic, 0.0);

  const LogitArchive pair = read_archive(fs::path(CED_FIXTURE_DIR) / "constant_pair_ood.csv");
  EXPECT_EQ(pair.labels, std::vector<int>(4, -1));
  ASSERT_TRUE(pair.manifest.prescaled_temperature.has_value());
  for (const auto& p : predict_ensemble(pair.raw_members(), ModelKind::de_credal)) {
    EXPECT_EQ(p.uq.epistemic, 0.0);
  }

  write_archive(a, path("re.csv"));
  EXPECT_TRUE(bitwise_equal(read_archive(path("re.csv")), a));
}

}  // namespace
}  // namespace ced
