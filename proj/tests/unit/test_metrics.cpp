#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ced/metrics.hpp"
#include "ced/types.hpp"

namespace ced {
namespace {

std::vector<ScoredSample> ood_split(const std::vector<double>& id, const std::vector<double>& ood) {
  std::vector<ScoredSample> s;
  for (double u : id) s.push_back({u, false, 0, std::nullopt, 0.0});
  for (double u : ood) s.push_back({u, true, 0, std::nullopt, 0.0});
  return s;
}

ScoredSample labeled(double conf, bool correct, double u = 0.0) {
  ScoredSample s;
  s.uncertainty = u;
  s.confidence = conf;
  s.predicted_class = 0;
  s.true_class = correct ? 0 : 1;
  return s;
}

TEST(Auroc, Examples) {
  EXPECT_NEAR(auroc(ood_split({0.1, 0.2}, {0.8, 0.9})), 1.0, 1e-12);
  EXPECT_NEAR(auroc(ood_split({0.1, 0.9}, {0.5, 0.95})), 0.75, 1e-9);
  EXPECT_NEAR(auroc(ood_split({0.3, 0.3, 0.3}, {0.3, 0.3})), 0.5, 1e-12);
}

TEST(Auroc, NeedsBothGroups) {
  EXPECT_THROW(auroc(ood_split({0.1, 0.2}, {})), InputError);
  EXPECT_THROW(auroc(ood_split({}, {0.1})), InputError);
}

TEST(Auroc, PairwiseOracleAndInvariance) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> id(30 + rep), ood(20 + rep);
    for (double& v : id) v = std::round(u(rng) * 20.0) / 20.0;
    for (double& v : ood) v = std::round((u(rng) + 0.3) * 20.0) / 20.0;
    double pairs = 0.0;
    for (double a : ood) {
      for (double b : id) pairs += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    }
    const double expect = pairs / static_cast<double>(id.size() * ood.size());
    const auto s = ood_split(id, ood);
    EXPECT_NEAR(auroc(s), expect, 1e-12);

    auto transformed = s;
    for (auto& x : transformed) x.uncertainty = std::exp(x.uncertainty);
    EXPECT_NEAR(auroc(transformed), auroc(s), 1e-12);
    for (auto& x : transformed) x.uncertainty = 2.0 * std::log(x.uncertainty) + 1.0;
    EXPECT_NEAR(auroc(transformed), auroc(s), 1e-12);
  }
}

TEST(Auroc, FlippedLabels) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredSample> s;
  for (int i = 0; i < 200; ++i) s.push_back({u(rng) + (i % 3 == 0 ? 0.2 : 0.0), i % 3 == 0, 0, {}, 0});
  auto flipped = s;
  for (auto& x : flipped) x.is_ood = !x.is_ood;
  EXPECT_NEAR(auroc(flipped), 1.0 - auroc(s), 1e-12);
}

TEST(Auprc, Examples) {
  EXPECT_NEAR(auprc(ood_split({0.1, 0.2}, {0.8, 0.9})), 1.0, 1e-12);
  EXPECT_NEAR(auprc(ood_split({0.1, 0.9}, {0.5, 0.95})), 5.0 / 6.0, 1e-9);
  EXPECT_NEAR(auprc(ood_split({0.4, 0.4, 0.4}, {0.4})), 0.25, 1e-12);
  EXPECT_THROW(auprc(ood_split({0.1}, {})), InputError);
}

TEST(Ece, Examples) {
  std::vector<ScoredSample> a{labeled(0.75, true), labeled(0.75, true), labeled(0.75, false),
                              labeled(0.75, true)};
  EXPECT_NEAR(ece(a, 1), 0.0, 1e-12);
  EXPECT_NEAR(ece(std::vector<ScoredSample>{labeled(1.0, false)}, 7), 1.0, 1e-12);
  EXPECT_NEAR(ece(std::vector<ScoredSample>{labeled(0.4, true), labeled(0.9, false)}, 2), 0.75,
              1e-9);
}

TEST(Ece, BinEdges) {
  const EceResult r = ece_bins(std::vector<ScoredSample>{labeled(0.5, true), labeled(0.0, false),
                                                         labeled(1.0, true)},
                               2);
  ASSERT_EQ(r.bins.size(), 2u);
  EXPECT_EQ(r.bins[0].count, 2u);
  EXPECT_EQ(r.bins[1].count, 1u);
  EXPECT_EQ(r.bins[0].bin_index, 0u);
  EXPECT_NEAR(r.bins[0].mean_confidence, 0.25, 1e-15);
  EXPECT_NEAR(r.bins[0].mean_accuracy, 0.5, 1e-15);
}

TEST(Ece, ZeroWhenCalibrated) {
  std::vector<ScoredSample> s;
  for (int i = 0; i < 5; ++i) s.push_back(labeled(0.6, i < 3));
  for (int i = 0; i < 4; ++i) s.push_back(labeled(0.25, i < 1));
  for (int i = 0; i < 2; ++i) s.push_back(labeled(1.0, true));
  EXPECT_NEAR(ece(s), 0.0, 1e-12);
}

TEST(Ece, IgnoresUnlabeledAndNeedsLabels) {
  std::vector<ScoredSample> s{labeled(0.9, true)};
  s.push_back({0.5, true, 0, std::nullopt, 0.2});
  EXPECT_NEAR(ece(s, 10), 0.1, 1e-12);
  EXPECT_THROW(ece(ood_split({0.1}, {0.2})), InputError);
  EXPECT_THROW(ece(s, 0), InputError);
}

TEST(ArCurve, Example) {
  std::vector<ScoredSample> s{labeled(0.9, true, 0.1), labeled(0.9, true, 0.2),
                              labeled(0.9, false, 0.9), labeled(0.9, true, 0.3)};
  const ArCurve c = accuracy_rejection_curve(s);
  ASSERT_EQ(c.points.size(), 4u);
  const double expect[] = {0.75, 1.0, 1.0, 1.0};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(c.points[k].accuracy, expect[k], 1e-12);
    EXPECT_NEAR(c.points[k].rejection_rate, static_cast<double>(k) / 4.0, 1e-15);
  }
  EXPECT_NEAR(c.auarc, 0.9375, 1e-9);
}

TEST(ArCurve, AllCorrectAndConstantUncertainty) {
  std::vector<ScoredSample> ok(5, labeled(0.8, true, 0.3));
  const ArCurve a = accuracy_rejection_curve(ok);
  for (const auto& p : a.points) EXPECT_EQ(p.accuracy, 1.0);
  EXPECT_EQ(a.auarc, 1.0);

  std::vector<ScoredSample> s{labeled(0.8, false, 0.5), labeled(0.8, true, 0.5),
                              labeled(0.8, true, 0.5), labeled(0.8, false, 0.5)};
  const ArCurve b = accuracy_rejection_curve(s);
  const double expect[] = {0.5, 2.0 / 3.0, 0.5, 0.0};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(b.points[k].accuracy, expect[k], 1e-12);
}

TEST(ArCurve, MonotoneWhenErrorsRankedFirst) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredSample> s;
  for (int i = 0; i < 100; ++i) {
    const bool correct = u(rng) < 0.7;
    s.push_back(labeled(0.7, correct, correct ? u(rng) : 1.0 + u(rng)));
  }
  const ArCurve c = accuracy_rejection_curve(s);
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    EXPECT_GE(c.points[k].accuracy, c.points[k - 1].accuracy - 1e-15);
  }
}

TEST(Accuracy, CountsLabeledOnly) {
  std::vector<ScoredSample> s{labeled(0.9, true), labeled(0.9, false), labeled(0.9, true)};
  s.push_back({0.5, true, 0, std::nullopt, 0.2});
  EXPECT_NEAR(accuracy(s), 2.0 / 3.0, 1e-15);
}

TEST(Metrics, Deterministic) {
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredSample> s;
  for (int i = 0; i < 300; ++i) {
    ScoredSample x = labeled(u(rng), u(rng) < 0.5, u(rng));
    x.is_ood = i % 4 == 0;
    s.push_back(x);
  }
  EXPECT_EQ(auroc(s), auroc(s));
  EXPECT_EQ(auprc(s), auprc(s));
  EXPECT_EQ(ece(s), ece(s));
  EXPECT_EQ(accuracy_rejection_curve(s).auarc, accuracy_rejection_curve(s).auarc);
}

}  // namespace
}  // namespace ced
