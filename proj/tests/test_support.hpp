#pragma once

// Scenario builders and random generators shared by the unit and
// acceptance suites.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "poolmech/poolmech.hpp"

namespace poolmech::testing {

inline Scenario make_scenario(std::vector<Producer> producers, double demand,
                              double consumer_utility = 100.0, bool relax = false) {
  Scenario s;
  s.producers = std::move(producers);
  s.demand = demand;
  s.consumer_utility = consumer_utility;
  s.relax_min_producers = relax;
  return s;
}

/// Four producers with C(e) = e + e^2 and capacity 2.
inline Scenario symmetric(double demand = 4.0, double consumer_utility = 100.0) {
  std::vector<Producer> ps;
  for (int i = 1; i <= 4; ++i) ps.push_back({i, 2.0, CostFunction{1, 1}});
  return make_scenario(std::move(ps), demand, consumer_utility);
}

/// The four-producer example: 2e+e^2, 3e+e^3, 4e+e^4, 5e+e^2, caps 2, D0 = 4.
inline Scenario four_producers() {
  return make_scenario({{1, 2.0, CostFunction{2, 1}},
                        {2, 2.0, CostFunction{3, 0, 1}},
                        {3, 2.0, CostFunction{4, 0, 0, 1}},
                        {4, 2.0, CostFunction{5, 1}}},
                       4.0);
}

/// Random validated cost of degree 2..max_degree. The top coefficient is
/// always positive; intermediate ones are zero a third of the time.
inline CostFunction random_cost(std::mt19937_64& rng, int max_degree = 4) {
  std::uniform_int_distribution<int> degree(2, max_degree);
  std::uniform_real_distribution<double> linear(1.0, 6.0);
  std::uniform_real_distribution<double> higher(0.2, 2.0);
  std::bernoulli_distribution drop(1.0 / 3.0);
  const int d = degree(rng);
  std::vector<double> c(d, 0.0);
  c[0] = linear(rng);
  for (int k = 1; k < d; ++k) {
    c[k] = (k + 1 < d && drop(rng)) ? 0.0 : higher(rng);
  }
  return CostFunction(std::move(c));
}

/// N in {4, 5}, degrees <= 4, x_i in [0.5, 3] on the 0.01 lattice,
/// D0 uniform in (0, sum x].
inline Scenario random_scenario(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(4, 5);
  std::uniform_int_distribution<int> cap_hundredths(50, 300);
  const int n = count(rng);
  std::vector<Producer> ps;
  double total = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double cap = cap_hundredths(rng) / 100.0;
    total += cap;
    ps.push_back({i, cap, random_cost(rng)});
  }
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  const double demand = (1.0 - frac(rng)) * total;  // (0, total]
  return make_scenario(std::move(ps), demand);
}

inline MessageProfile random_profile(const Scenario& s, std::mt19937_64& rng,
                                     double max_price = 10.0) {
  MessageProfile m;
  std::uniform_real_distribution<double> price(0.0, max_price);
  for (const auto& p : s.producers) {
    std::uniform_real_distribution<double> e(0.0, p.capacity);
    const double ev = e(rng);
    m.messages.push_back({ev, price(rng)});
  }
  return m;
}

inline double max_marginal_at_capacity(const Scenario& s) {
  double m = 0.0;
  for (const auto& p : s.producers) m = std::max(m, marginal(p.cost, p.capacity));
  return m;
}

/// Central difference of f at x with step h (x - h must stay in-domain).
template <typename F>
double central_difference(F f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace poolmech::testing
