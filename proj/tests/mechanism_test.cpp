#include <gtest/gtest.h>

#include <random>

#include "poolmech/mechanism.hpp"
#include "test_support.hpp"

namespace poolmech {
namespace {

using testing::symmetric;

MessageProfile uniform(double e, double p, std::size_t n = 4) {
  return MessageProfile{std::vector<Message>(n, Message{e, p})};
}

MessageProfile mixed() {
  return MessageProfile{{{1, 2}, {1, 3}, {1, 2}, {0, 3}}};
}

TEST(Zeta, Examples) {
  EXPECT_EQ(zeta(uniform(1, 0), 4.0), 0.0);
  EXPECT_EQ(zeta(MessageProfile{{{1, 0}, {1, 0}, {1, 0}, {0, 0}}}, 4.0), 1.0);
  EXPECT_EQ(zeta(uniform(2, 0), 4.0), 4.0);
}

TEST(Outcome, EqualPricesBalancedSupply) {
  const Allocation a = outcome(uniform(1, 2), symmetric());
  EXPECT_EQ(a.e, (std::vector<double>{1, 1, 1, 1}));
  EXPECT_EQ(a.t, (std::vector<double>{2, 2, 2, 2}));
  EXPECT_EQ(a.consumer_payment, 8.0);
  EXPECT_EQ(a.zeta, 0.0);
}

TEST(Outcome, PenalizesPriceGapAndImbalance) {
  const Allocation a = outcome(mixed(), symmetric());
  EXPECT_EQ(a.zeta, 1.0);
  // 3*1 - (2-3)^2 - 2*2*1^2
  EXPECT_DOUBLE_EQ(a.t[0], -2.0);
  // Producer 4 wraps around to p_1 = 2: 2*0 - (3-2)^2 - 2*3*1.
  EXPECT_DOUBLE_EQ(a.t[3], -7.0);
}

TEST(Outcome, AllZeroMessagesGiveZeroAllocation) {
  const Allocation a = outcome(uniform(0, 0), symmetric());
  EXPECT_EQ(a.t, (std::vector<double>{0, 0, 0, 0}));
  EXPECT_EQ(a.consumer_payment, 0.0);
}

TEST(ProducerUtility, Examples) {
  const Scenario s = symmetric();
  EXPECT_DOUBLE_EQ(producer_utility(0, uniform(1, 3), s), 1.0);
  EXPECT_EQ(producer_utility(2, uniform(0, 0), s), 0.0);
  EXPECT_DOUBLE_EQ(producer_utility(0, mixed(), s), -4.0);
  EXPECT_THROW(producer_utility(4, mixed(), s), std::out_of_range);
}

TEST(ConsumerUtility, Examples) {
  const Scenario s = symmetric(4.0, 100.0);
  EXPECT_DOUBLE_EQ(consumer_utility(outcome(uniform(1, 2), s), s), 92.0);
  EXPECT_DOUBLE_EQ(consumer_utility(outcome(uniform(0, 0), s), s), 100.0);
  Allocation a;
  a.t = {-1, -1, -2, -1};
  EXPECT_DOUBLE_EQ(consumer_utility(a, symmetric(4.0, 0.0)), 5.0);
}

TEST(SocialWelfare, Examples) {
  const Scenario s = symmetric(4.0, 100.0);
  const auto w = social_welfare(std::vector<double>{1, 1, 1, 1}, s);
  EXPECT_DOUBLE_EQ(w.cost_only, -8.0);
  EXPECT_DOUBLE_EQ(w.with_consumers, 92.0);
  EXPECT_EQ(social_welfare(std::vector<double>{0, 0, 0, 0}, s).cost_only, 0.0);
  EXPECT_NEAR(social_welfare(std::vector<double>{2, 1.12, 0.88, 0}, testing::four_producers())
                  .cost_only,
              -16.88462336, 1e-9);
  EXPECT_THROW(social_welfare(std::vector<double>{3, 0, 0, 0}, s), std::invalid_argument);
}

TEST(BudgetLedger, ItemizesAndNetsToZero) {
  const Scenario s = symmetric();
  for (const auto& m : {uniform(1, 2), mixed(), uniform(0, 0)}) {
    const Allocation a = outcome(m, s);
    const BudgetLedger l = budget_ledger(a, m);
    EXPECT_EQ(l.net, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(l.lines[i].receipt + l.lines[i].penalty, l.lines[i].transfer);
    }
  }
  const BudgetLedger zero = budget_ledger(outcome(uniform(0, 0), s), uniform(0, 0));
  for (const auto& line : zero.lines) {
    EXPECT_EQ(line.receipt, 0.0);
    EXPECT_EQ(line.penalty, 0.0);
    EXPECT_EQ(line.transfer, 0.0);
  }
  EXPECT_EQ(zero.consumer_payment, 0.0);
}

TEST(NormalizeProfile, ClampsTinyOvershootRejectsLarger) {
  const Scenario s = symmetric();
  MessageProfile m = uniform(1, 1);
  m[0].e_hat = 2.0 + 5e-13;
  EXPECT_EQ(normalize_profile(m, s)[0].e_hat, 2.0);
  m[0].e_hat = 2.0 + 1e-9;
  EXPECT_THROW(normalize_profile(m, s), std::invalid_argument);
  m[0].e_hat = -0.1;
  EXPECT_THROW(normalize_profile(m, s), std::invalid_argument);
  m[0] = {1.0, -1.0};
  EXPECT_THROW(normalize_profile(m, s), std::invalid_argument);
  EXPECT_THROW(normalize_profile(uniform(1, 1, 3), s), std::invalid_argument);
}

class MechanismProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{99};
};

TEST_F(MechanismProperties, BudgetBalancedOffEquilibrium) {
  for (int k = 0; k < 1000; ++k) {
    const Scenario s = testing::random_scenario(rng);
    const MessageProfile m = testing::random_profile(s, rng);
    const Allocation a = outcome(m, s);
    const BudgetLedger l = budget_ledger(a, m);
    ASSERT_EQ(l.net, 0.0);
    for (const auto& line : l.lines) {
      ASSERT_EQ(line.receipt + line.penalty, line.transfer);
    }
  }
}

TEST_F(MechanismProperties, ReceiptIndependentOfOwnPrice) {
  std::uniform_real_distribution<double> price(0.0, 20.0);
  for (int k = 0; k < 200; ++k) {
    const Scenario s = testing::random_scenario(rng);
    MessageProfile m = testing::random_profile(s, rng);
    const std::size_t i = k % s.size();
    const double before = budget_ledger(outcome(m, s), m).lines[i].receipt;
    m[i].p = price(rng);
    EXPECT_EQ(budget_ledger(outcome(m, s), m).lines[i].receipt, before);
  }
}

TEST_F(MechanismProperties, ZetaIgnoresPrices) {
  std::uniform_real_distribution<double> price(0.0, 20.0);
  for (int k = 0; k < 200; ++k) {
    const Scenario s = testing::random_scenario(rng);
    MessageProfile m = testing::random_profile(s, rng);
    const double z = zeta(m, s.demand);
    for (auto& msg : m.messages) msg.p = price(rng);
    EXPECT_EQ(zeta(m, s.demand), z);
  }
}

TEST_F(MechanismProperties, EqualPricesAndBalanceGivePriceTimesEnergy) {
  std::uniform_real_distribution<double> price(0.0, 20.0);
  std::uniform_int_distribution<int> units(0, 512);
  for (int k = 0; k < 200; ++k) {
    Scenario s = testing::random_scenario(rng);
    // Dyadic proposals sum exactly, so zeta is exactly zero.
    MessageProfile m;
    const double p = price(rng);
    double sum = 0.0;
    for (const auto& prod : s.producers) {
      const double e = std::min(units(rng) / 1024.0, prod.capacity);
      m.messages.push_back({e, p});
      sum += e;
    }
    s.demand = sum;
    const Allocation a = outcome(m, s);
    ASSERT_EQ(a.zeta, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(a.t[i], p * a.e[i]);
  }
}

}  // namespace
}  // namespace poolmech
