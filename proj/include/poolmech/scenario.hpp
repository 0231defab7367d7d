#pragma once

// Market instance: producers with capacities and costs, an inelastic demand,
// and the consumers' fixed utility for receiving that demand.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "poolmech/cost_model.hpp"

namespace poolmech {

/// Reference solution attached to a fixture, kept for comparison only.
struct ReferenceSolution {
  std::vector<double> production;
  double price = 0.0;

  friend bool operator==(const ReferenceSolution&,
                         const ReferenceSolution&) = default;
};

struct Scenario {
  std::vector<Producer> producers;
  double demand = 0.0;            // D0, MWh
  double consumer_utility = 0.0;  // u_{D0}
  // Lowers the minimum producer count from 4 to 1.
  bool relax_min_producers = false;
  std::optional<ReferenceSolution> reference;

  std::size_t size() const { return producers.size(); }

  double total_capacity() const {
    double sum = 0.0;
    for (const auto& p : producers) sum += p.capacity;
    return sum;
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// One violated modelling assumption, tagged "A1", "A3", "A5", "A7", ...
struct ScenarioIssue {
  std::string assumption;
  std::string message;
};

inline std::vector<ScenarioIssue> check_scenario(const Scenario& s) {
  std::vector<ScenarioIssue> issues;
  const std::size_t min_n = s.relax_min_producers ? 1 : 4;
  if (s.size() < min_n) {
    issues.push_back(
        {"A1", "need " + std::string(s.relax_min_producers ? "N >= 1" : "N > 3") +
                   " producers, got " + std::to_string(s.size())});
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& p = s.producers[i];
    if (!(p.capacity > 0.0) || !std::isfinite(p.capacity)) {
      issues.push_back({"A3", "producer " + std::to_string(p.id) +
                                  ": capacity must be positive and finite"});
    }
    if (auto v = validate(p.cost); !v) {
      issues.push_back({"A5", "producer " + std::to_string(p.id) + ": " +
                                  v.message + " [" + to_string(v.clause) + "]"});
    }
  }
  if (!(s.demand >= 0.0) || !std::isfinite(s.demand)) {
    issues.push_back({"A7", "demand must be finite and non-negative"});
  } else if (s.demand > s.total_capacity()) {
    issues.push_back({"A7", "D0 exceeds total capacity"});
  }
  if (!std::isfinite(s.consumer_utility)) {
    issues.push_back({"A8", "consumer utility must be finite"});
  }
  if (s.reference && s.reference->production.size() != s.size()) {
    issues.push_back({"fixture", "reference production has wrong length"});
  }
  return issues;
}

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<ScenarioIssue> issues)
      : std::runtime_error(format(issues)), issues_(std::move(issues)) {}

  const std::vector<ScenarioIssue>& issues() const { return issues_; }

 private:
  static std::string format(const std::vector<ScenarioIssue>& issues) {
    std::string out = "invalid scenario:";
    for (const auto& i : issues) out += " " + i.assumption + ": " + i.message + ";";
    return out;
  }

  std::vector<ScenarioIssue> issues_;
};

inline void require_valid(const Scenario& s) {
  if (auto issues = check_scenario(s); !issues.empty()) {
    throw ScenarioError(std::move(issues));
  }
}

/// Sum of C_i(e_i).
inline double total_cost(const Scenario& s, const std::vector<double>& e) {
  if (e.size() != s.size()) {
    throw std::invalid_argument("total_cost: profile length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) sum += eval(s.producers[i].cost, e[i]);
  return sum;
}

inline double total_energy(const std::vector<double>& e) {
  return std::accumulate(e.begin(), e.end(), 0.0);
}

}  // namespace poolmech
