#include <gtest/gtest.h>

#include <cmath>

#include "ced/credal.hpp"
#include "support.hpp"

namespace ced {
namespace {

using Members = std::vector<std::vector<double>>;

void expect_vec_near(const std::vector<double>& a, const std::vector<double>& b,
                     double tol = 1e-12) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "i=" << i;
}

TEST(ProbVector, RenormalizesWithinTolerance) {
  const ProbVector p({0.5, 0.5 + 5e-10});
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(ProbVector, RejectsBadInput) {
  EXPECT_THROW(ProbVector({1.0}), InputError);
  EXPECT_THROW(ProbVector({0.6, 0.6}), InputError);
  EXPECT_THROW(ProbVector({1.2, -0.2}), InputError);
  EXPECT_THROW(ProbVector({NAN, 1.0}), InputError);
}

TEST(WrapEnsemble, TwoMembers) {
  const IntervalSystem s = wrap_ensemble(Members{{0.6, 0.4}, {0.8, 0.2}});
  expect_vec_near(s.lower, {0.6, 0.2});
  expect_vec_near(s.upper, {0.8, 0.4});
}

TEST(WrapEnsemble, SingleMember) {
  const IntervalSystem s = wrap_ensemble(Members{{0.5, 0.5}});
  expect_vec_near(s.lower, {0.5, 0.5});
  expect_vec_near(s.upper, {0.5, 0.5});
}

TEST(WrapEnsemble, ThreeClasses) {
  const IntervalSystem s =
      wrap_ensemble(Members{{0.5, 0.3, 0.2}, {0.4, 0.4, 0.2}, {0.6, 0.2, 0.2}});
  expect_vec_near(s.lower, {0.4, 0.2, 0.2});
  expect_vec_near(s.upper, {0.6, 0.4, 0.2});
}

TEST(WrapEnsemble, Errors) {
  EXPECT_THROW(wrap_ensemble(Members{{0.5, 0.5}, {0.2, 0.3, 0.5}}), InputError);
  EXPECT_THROW(wrap_ensemble(Members{{0.5, 0.6}}), InputError);
  EXPECT_THROW(wrap_ensemble(Members{}), InputError);
}

TEST(WrapEnsemble, MatrixOverload) {
  const Matrix m = Matrix::from_rows({{0.6, 0.4}, {0.8, 0.2}});
  EXPECT_EQ(wrap_ensemble(m), wrap_ensemble(Members{{0.6, 0.4}, {0.8, 0.2}}));
}

TEST(IntersectionProbability, Examples) {
  auto a = intersection_probability({{0.6, 0.2}, {0.8, 0.4}});
  EXPECT_NEAR(a.beta, 0.5, 1e-12);
  expect_vec_near(a.p_star.vec(), {0.7, 0.3});

  auto b = intersection_probability({{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_EQ(b.beta, 0.5);
  expect_vec_near(b.p_star.vec(), {0.5, 0.5});

  auto c = intersection_probability({{0.4, 0.2, 0.2}, {0.6, 0.4, 0.2}});
  EXPECT_NEAR(c.beta, 0.5, 1e-12);
  expect_vec_near(c.p_star.vec(), {0.5, 0.3, 0.2});
}

TEST(IntersectionProbability, RejectsInvalid) {
  EXPECT_THROW(intersection_probability({{0.6, 0.6}, {0.7, 0.7}}), InputError);
}

TEST(Reconstruct, Examples) {
  auto a = reconstruct_intervals(CredalPrediction(ProbVector{0.7, 0.3}, {0.2, 0.2}, 0.5));
  expect_vec_near(a.lower, {0.6, 0.2});
  expect_vec_near(a.upper, {0.8, 0.4});

  auto b = reconstruct_intervals(CredalPrediction(ProbVector{0.1, 0.9}, {0.5, 0.0}, 1.0));
  expect_vec_near(b.lower, {0.0, 0.9});
  expect_vec_near(b.upper, {0.1, 0.9});
  EXPECT_LT(b.upper[0] - b.lower[0], 0.5);

  auto c = reconstruct_intervals(CredalPrediction(ProbVector{0.2, 0.3, 0.5}, {0, 0, 0}, 0.3));
  EXPECT_EQ(c.lower, c.upper);
  expect_vec_near(c.lower, {0.2, 0.3, 0.5});
}

TEST(CredalPrediction, RejectsOutOfRange) {
  EXPECT_THROW(CredalPrediction(ProbVector{0.5, 0.5}, {0.1}, 0.5), InputError);
  EXPECT_THROW(CredalPrediction(ProbVector{0.5, 0.5}, {1.1, 0.0}, 0.5), InputError);
  EXPECT_THROW(CredalPrediction(ProbVector{0.5, 0.5}, {0.1, 0.1}, -0.1), InputError);
}

TEST(CheckValidity, Examples) {
  EXPECT_TRUE(check_validity({{0.6, 0.2}, {0.8, 0.4}}));
  const Validity bad = check_validity({{0.6, 0.6}, {0.7, 0.7}});
  EXPECT_FALSE(bad);
  ASSERT_EQ(bad.violations.size(), 1u);
  EXPECT_NE(bad.violations[0].find("sum of lower"), std::string::npos);
  EXPECT_TRUE(check_validity({{1.0, 0.0}, {1.0, 0.0}}));
}

TEST(CheckValidity, ListsEveryViolation) {
  const Validity v = check_validity({{-0.1, 0.5, 0.9}, {0.2, 0.4, 1.3}});
  EXPECT_FALSE(v);
  EXPECT_EQ(v.violations.size(), 4u);
  EXPECT_FALSE(check_validity({{0.1}, {0.2, 0.3}}));
}

TEST(PredictClass, Examples) {
  EXPECT_EQ(predict_class(ProbVector{0.7, 0.3}), 0u);
  EXPECT_EQ(predict_class(ProbVector{0.5, 0.5}), 0u);
  EXPECT_EQ(predict_class(ProbVector{0.2, 0.3, 0.5}), 2u);
}

TEST(CredalProperties, RandomEnsembles) {
  testing::Rng rng(11);
  std::uniform_int_distribution<std::size_t> m_dist(1, 10), c_dist(2, 10);
  for (int i = 0; i < 2000; ++i) {
    const auto members = testing::random_ensemble(rng, m_dist(rng), c_dist(rng));
    const auto v = testing::credal_violations(members);
    ASSERT_TRUE(v.empty()) << "case " << i << ": " << v.front();
  }
}

TEST(CredalProperties, ContainmentUnderClipping) {
  testing::Rng rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t c = 2 + i % 6;
    std::vector<double> delta(c);
    for (double& d : delta) d = u(rng);
    const CredalPrediction pred(ProbVector(testing::random_simplex(rng, c)), delta, u(rng));
    const auto v = testing::reconstruction_violations(pred);
    ASSERT_TRUE(v.empty()) << v.front();
  }
}

TEST(CredalProperties, ArgmaxInvariantUnderScaling) {
  testing::Rng rng(13);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int i = 0; i < 500; ++i) {
    auto p = testing::random_simplex(rng, 5);
    const double s = u(rng);
    std::vector<double> scaled = p;
    double sum = 0.0;
    for (double& v : scaled) sum += (v *= s);
    for (double& v : scaled) v /= sum;
    EXPECT_EQ(predict_class(p), predict_class(scaled));
  }
}

}  // namespace
}  // namespace ced
