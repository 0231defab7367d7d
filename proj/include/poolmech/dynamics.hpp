#pragma once

// Best-response iteration on the mechanism's game.
//
// The mechanism comes with no adjustment process, so this harness only
// records what raw best-response play does from a given start: where it
// ends, and how far each step is from the two known equilibria.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "poolmech/centralized_solver.hpp"
#include "poolmech/equilibrium.hpp"
#include "poolmech/mechanism.hpp"

namespace poolmech {

enum class Schedule { kSequential, kSimultaneous };

enum class Verdict {
  kConvergedTrivial,
  kConvergedNontrivial,
  // Stationary, but at neither known equilibrium.
  kConvergedElsewhere,
  kCycling,
  kBudgetExhausted,
};

inline const char* to_string(Schedule s) {
  return s == Schedule::kSequential ? "sequential" : "simultaneous";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kConvergedTrivial: return "converged-to-trivial";
    case Verdict::kConvergedNontrivial: return "converged-to-nontrivial";
    case Verdict::kConvergedElsewhere: return "converged-elsewhere";
    case Verdict::kCycling: return "cycling";
    case Verdict::kBudgetExhausted: return "budget-of-iterations-exhausted";
  }
  return "unknown";
}

inline bool converged(Verdict v) {
  return v == Verdict::kConvergedTrivial || v == Verdict::kConvergedNontrivial ||
         v == Verdict::kConvergedElsewhere;
}

/// Max over producers and both message coordinates.
inline double profile_distance(const MessageProfile& a, const MessageProfile& b) {
  if (a.size() != b.size()) throw std::invalid_argument("profile_distance: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max({d, std::abs(a[i].e_hat - b[i].e_hat), std::abs(a[i].p - b[i].p)});
  }
  return d;
}

struct DynamicsConfig {
  Schedule schedule = Schedule::kSequential;
  std::size_t max_iter = 200;  // sweeps
  double conv_tol = 1e-9;
  // Distance within which a stationary endpoint is attributed to a known NE.
  double classify_tol = 1e-4;
  double solver_tol = kDefaultSolverTol;
  SearchConfig search;
};

struct Trajectory {
  // steps[0] is the start. Sequential play appends one profile per
  // single-producer update, simultaneous play one per joint update.
  std::vector<MessageProfile> steps;
  std::vector<double> distance_to_trivial;
  std::vector<double> distance_to_nontrivial;  // +inf when D0 = 0
  std::size_t sweeps = 0;
  Verdict verdict = Verdict::kBudgetExhausted;

  const MessageProfile& final_profile() const { return steps.back(); }
};

inline Trajectory run_dynamics(const Scenario& s, const MessageProfile& init,
                               const DynamicsConfig& cfg = {}) {
  require_valid(s);
  if (cfg.max_iter < 1) throw std::invalid_argument("run_dynamics: max_iter must be >= 1");
  if (!(cfg.conv_tol > 0.0)) throw std::invalid_argument("run_dynamics: conv_tol must be > 0");

  const MessageProfile start = normalize_profile(init, s);
  const MessageProfile trivial = trivial_ne(s);
  const bool has_nontrivial = s.demand > 0.0;
  const MessageProfile nontrivial =
      has_nontrivial ? profile_from_solution(solve_max1(s, cfg.solver_tol)) : trivial;

  Trajectory tr;
  auto record = [&](const MessageProfile& m) {
    tr.steps.push_back(m);
    tr.distance_to_trivial.push_back(profile_distance(m, trivial));
    tr.distance_to_nontrivial.push_back(has_nontrivial
                                            ? profile_distance(m, nontrivial)
                                            : std::numeric_limits<double>::infinity());
  };
  record(start);

  std::vector<MessageProfile> sweep_ends{start};
  MessageProfile current = start;
  for (std::size_t sweep = 0; sweep < cfg.max_iter; ++sweep) {
    const MessageProfile before = current;
    if (cfg.schedule == Schedule::kSequential) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        current[i] = best_response(i, current, s, cfg.search).message;
        record(current);
      }
    } else {
      MessageProfile next = current;
      for (std::size_t i = 0; i < s.size(); ++i) {
        next[i] = best_response(i, current, s, cfg.search).message;
      }
      current = std::move(next);
      record(current);
    }
    tr.sweeps = sweep + 1;

    if (profile_distance(before, current) <= cfg.conv_tol) {
      if (tr.distance_to_trivial.back() <= cfg.classify_tol) {
        tr.verdict = Verdict::kConvergedTrivial;
      } else if (tr.distance_to_nontrivial.back() <= cfg.classify_tol) {
        tr.verdict = Verdict::kConvergedNontrivial;
      } else {
        tr.verdict = Verdict::kConvergedElsewhere;
      }
      return tr;
    }
    // Revisiting an older sweep endpoint without having settled.
    for (std::size_t k = 0; k + 1 < sweep_ends.size(); ++k) {
      if (profile_distance(sweep_ends[k], current) <= cfg.conv_tol) {
        tr.verdict = Verdict::kCycling;
        return tr;
      }
    }
    sweep_ends.push_back(current);
  }
  tr.verdict = Verdict::kBudgetExhausted;
  return tr;
}

}  // namespace poolmech
