// Clears a four-producer pool and prints the equilibrium messages and the
// transfers they produce.

#include <iostream>

#include "poolmech/poolmech.hpp"

int main() {
  using namespace poolmech;
  Scenario s;
  s.producers = {{1, 2.0, CostFunction{2, 1}},
                 {2, 2.0, CostFunction{3, 0, 1}},
                 {3, 2.0, CostFunction{4, 0, 0, 1}},
                 {4, 2.0, CostFunction{5, 1}}};
  s.demand = 4.0;
  s.consumer_utility = 100.0;

  const EquilibriumReport ne = construct_ne(s);
  const Allocation a = outcome(ne.profile, s);
  std::cout << "price " << ne.features.price << "  epsilon " << ne.epsilon << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::cout << "producer " << i + 1 << ": e = " << a.e[i] << ", t = " << a.t[i]
              << ", u = " << ne.features.utilities[i] << '\n';
  }
  std::cout << "consumers pay " << a.consumer_payment << '\n';
}
