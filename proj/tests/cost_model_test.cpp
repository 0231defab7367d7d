#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "poolmech/cost_model.hpp"
#include "test_support.hpp"

namespace poolmech {
namespace {

TEST(CostValidate, AcceptsLinearPlusQuadratic) {
  EXPECT_TRUE(validate(CostFunction{2, 1}).ok());
}

TEST(CostValidate, RejectsZeroLinearTerm) {
  const auto v = validate(CostFunction{0, 1});
  EXPECT_FALSE(v.ok());
  EXPECT_EQ(v.clause, CostClause::kLinearTermNotPositive);
  EXPECT_STREQ(to_string(v.clause), "c_1 > 0");
}

TEST(CostValidate, RejectsPurelyLinear) {
  const auto v = validate(CostFunction{3});
  EXPECT_EQ(v.clause, CostClause::kNotStrictlyConvex);
  EXPECT_STREQ(to_string(v.clause), "strict convexity");
}

TEST(CostValidate, RejectsNegativeNonFiniteAndEmpty) {
  EXPECT_EQ(validate(CostFunction{1, -1}).clause, CostClause::kNegativeCoefficient);
  EXPECT_EQ(validate(CostFunction{1, NAN}).clause, CostClause::kNonFinite);
  EXPECT_EQ(validate(CostFunction{1, INFINITY}).clause, CostClause::kNonFinite);
  EXPECT_EQ(validate(CostFunction{}).clause, CostClause::kEmpty);
}

TEST(CostEval, Examples) {
  EXPECT_DOUBLE_EQ(eval(CostFunction{2, 1}, 2.0), 8.0);
  EXPECT_EQ(eval(CostFunction{3, 0, 1}, 0.0), 0.0);
  EXPECT_NEAR(eval(CostFunction{3, 0, 1}, 1.12), 3 * 1.12 + 1.12 * 1.12 * 1.12, 1e-12);
  EXPECT_NEAR(eval(CostFunction{3, 0, 1}, 1.12), 4.7649, 1e-4);
}

TEST(CostMarginal, Examples) {
  EXPECT_DOUBLE_EQ(marginal(CostFunction{2, 1}, 2.0), 6.0);
  EXPECT_DOUBLE_EQ(marginal(CostFunction{3, 0, 1}, 1.0), 6.0);
  EXPECT_DOUBLE_EQ(marginal(CostFunction{5, 1}, 0.75), 6.5);
  const auto fd = testing::central_difference(
      [](double e) { return eval(CostFunction{5, 1}, e); }, 0.75, 1e-5);
  EXPECT_NEAR(fd, 6.5, 1e-8);
}

TEST(CostCurvature, Examples) {
  EXPECT_DOUBLE_EQ(curvature(CostFunction{2, 1}, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(curvature(CostFunction{3, 0, 1}, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(curvature(CostFunction{4, 0, 0, 1}, 1.0), 12.0);
}

TEST(CostQueries, RejectNegativeEnergy) {
  const CostFunction c{1, 1};
  EXPECT_THROW(eval(c, -1e-9), std::invalid_argument);
  EXPECT_THROW(marginal(c, -1.0), std::invalid_argument);
  EXPECT_THROW(curvature(c, -1.0), std::invalid_argument);
  EXPECT_THROW(eval(c, NAN), std::invalid_argument);
}

TEST(InverseMarginal, Examples) {
  // 2 + 2e = 6.5 at e = 2.25, above the cap.
  EXPECT_EQ(inverse_marginal(CostFunction{2, 1}, 6.5, 2.0), 2.0);
  EXPECT_EQ(inverse_marginal(CostFunction{5, 1}, 5.0, 2.0), 0.0);
  EXPECT_NEAR(inverse_marginal(CostFunction{3, 0, 1}, 6.0, 2.0), 1.0, 1e-12);
}

TEST(InverseMarginal, RejectsBadArguments) {
  EXPECT_THROW(inverse_marginal(CostFunction{1, 1}, -1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(inverse_marginal(CostFunction{1, 1}, 1.0, 0.0), std::invalid_argument);
}

class CostProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{20240601};
};

TEST_F(CostProperties, CostBelowMarginalTimesEnergy) {
  std::uniform_real_distribution<double> energy(1e-6, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const CostFunction c = testing::random_cost(rng);
    ASSERT_TRUE(validate(c).ok());
    const double e = energy(rng);
    EXPECT_LT(eval(c, e), marginal(c, e) * e);
  }
}

TEST_F(CostProperties, DerivativesMatchFiniteDifferences) {
  std::uniform_real_distribution<double> energy(0.1, 3.0);
  for (int k = 0; k < 500; ++k) {
    const CostFunction c = testing::random_cost(rng);
    const double e = energy(rng);
    const double h = 1e-5 * std::max(1.0, e);
    const double fd1 = testing::central_difference([&](double x) { return eval(c, x); }, e, h);
    const double fd2 =
        testing::central_difference([&](double x) { return marginal(c, x); }, e, h);
    EXPECT_LE(std::abs(fd1 - marginal(c, e)) / std::abs(marginal(c, e)), 1e-6);
    EXPECT_LE(std::abs(fd2 - curvature(c, e)) / std::abs(curvature(c, e)), 1e-6);
  }
}

TEST_F(CostProperties, InverseMarginalRoundTrips) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const CostFunction c = testing::random_cost(rng);
    const double cap = 0.5 + 2.5 * unit(rng);
    const double e = cap * unit(rng);
    EXPECT_NEAR(inverse_marginal(c, marginal(c, e), cap), e, 1e-9);
  }
}

TEST_F(CostProperties, MarginalStrictlyIncreasing) {
  std::uniform_real_distribution<double> energy(0.0, 5.0);
  for (int k = 0; k < 500; ++k) {
    const CostFunction c = testing::random_cost(rng);
    double a = energy(rng);
    double b = energy(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    EXPECT_LT(marginal(c, a), marginal(c, b));
  }
}

}  // namespace
}  // namespace poolmech
