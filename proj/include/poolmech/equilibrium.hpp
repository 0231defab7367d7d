#pragma once

// Nash equilibria of the game induced by the pool mechanism.
//
// Two equilibria are known: the trivial one where every producer sends
// (0, 0), and the one built from the centralized optimum by proposing
// e_hat_i = e_i* and the common price p_i = lambda*. Both are certified
// numerically: verify_epsilon_ne searches every producer's unilateral
// deviations and reports the largest utility gain found.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "poolmech/centralized_solver.hpp"
#include "poolmech/mechanism.hpp"
#include "poolmech/scenario.hpp"

namespace poolmech {

struct SearchConfig {
  std::size_t grid = 4001;  // points over [0, x_i]
  int refine_iter = 100;
};

struct EquilibriumConfig {
  double solver_tol = kDefaultSolverTol;
  double epsilon_threshold = 1e-4;
  double audit_tol = 1e-6;
  SearchConfig search;
};

enum class EquilibriumKind { kTrivial, kNontrivial };

inline const char* to_string(EquilibriumKind k) {
  return k == EquilibriumKind::kTrivial ? "trivial" : "nontrivial";
}

struct BestResponse {
  Message message;
  double utility = 0.0;
};

namespace detail {

// Producer i's problem with everyone else fixed. For a given proposal e the
// optimal own price is max(0, q - z^2), q = p_{i+1}, z = D0 - others - e;
// value() is the utility at that price, slope() its derivative in e.
struct ResponseProblem {
  const CostFunction* cost;
  double next_price;
  double demand_left;  // D0 - sum_{j != i} e_hat_j
  double cap;

  double imbalance(double e) const { return demand_left - e; }

  double best_price(double e) const {
    const double z = imbalance(e);
    return std::max(0.0, next_price - z * z);
  }

  double value(double e) const {
    const double z = imbalance(e);
    return -poolmech::eval(*cost, e) +
           tax(best_price(e), next_price, e, z * z);
  }

  double slope(double e) const {
    return -marginal(*cost, e) + next_price + 4.0 * best_price(e) * imbalance(e);
  }
};

}  // namespace detail

/// Maximizes producer i's utility over its own message with all other
/// messages held fixed.
///
/// The price has a closed form for each proposed quantity, so the search is
/// one-dimensional: a grid scan over [0, x_i], then golden-section refinement
/// between the best point's neighbours, then bisection on the derivative when
/// it changes sign in that bracket.
inline BestResponse best_response(std::size_t i, const MessageProfile& profile,
                                  const Scenario& s, const SearchConfig& cfg = {}) {
  if (i >= s.size() || profile.size() != s.size()) {
    throw std::invalid_argument("best_response: bad index or profile");
  }
  if (s.size() < 2) {
    // p_{i+1} would be the producer's own price and utility is unbounded in it.
    throw std::domain_error("best_response: needs at least two producers");
  }
  if (cfg.grid < 3) throw std::invalid_argument("best_response: grid must be >= 3");

  double others = 0.0;
  for (std::size_t j = 0; j < profile.size(); ++j) {
    if (j != i) others += profile[j].e_hat;
  }
  const double cap = s.producers[i].capacity;
  const detail::ResponseProblem prob{&s.producers[i].cost, profile.next_price(i),
                                     s.demand - others, cap};

  const double h = cap / static_cast<double>(cfg.grid - 1);
  auto grid_point = [&](std::size_t k) {
    return k + 1 == cfg.grid ? cap : static_cast<double>(k) * h;
  };
  std::size_t k_best = 0;
  double v_best = prob.value(0.0);
  for (std::size_t k = 1; k < cfg.grid; ++k) {
    const double v = prob.value(grid_point(k));
    if (v > v_best) {
      v_best = v;
      k_best = k;
    }
  }
  double e_best = grid_point(k_best);

  const double lo = k_best == 0 ? 0.0 : grid_point(k_best - 1);
  const double hi = k_best + 1 == cfg.grid ? cap : grid_point(k_best + 1);
  auto consider = [&](double e) {
    const double v = prob.value(e);
    if (v > v_best) {
      v_best = v;
      e_best = e;
    }
  };

  // Golden section.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = prob.value(c);
  double fd = prob.value(d);
  for (int it = 0; it < cfg.refine_iter && b - a > 0.0; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = prob.value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = prob.value(d);
    }
  }
  consider(0.5 * (a + b));

  // Golden section stalls near sqrt(machine epsilon) in e because the value
  // is flat at the optimum; the derivative is not.
  double sa = lo;
  double sb = hi;
  if (prob.slope(sa) > 0.0 && prob.slope(sb) < 0.0) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (sa + sb);
      if (mid <= sa || mid >= sb) break;
      if (prob.slope(mid) > 0.0) {
        sa = mid;
      } else {
        sb = mid;
      }
    }
    // Values within rounding noise of each other are a tie; the root of the
    // derivative locates the optimum far more precisely than the values do.
    const double root = std::abs(prob.slope(sa)) <= std::abs(prob.slope(sb)) ? sa : sb;
    const double v_root = prob.value(root);
    const double noise = 1e-12 * (1.0 + std::abs(v_best) + prob.next_price * cap);
    if (v_root >= v_best - noise) {
      v_best = std::max(v_best, v_root);
      e_best = root;
    }
  }

  BestResponse br;
  br.message = {e_best, prob.best_price(e_best)};
  MessageProfile deviated = profile;
  deviated[i] = br.message;
  br.utility = producer_utility(i, deviated, s);
  return br;
}

/// Largest unilateral utility gain any producer can find, floored at 0.
inline double verify_epsilon_ne(const MessageProfile& profile, const Scenario& s,
                                const SearchConfig& cfg = {}) {
  const std::vector<double> current = producer_utilities(profile, s);
  double eps = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const BestResponse br = best_response(i, profile, s, cfg);
    eps = std::max(eps, br.utility - current[i]);
  }
  return eps;
}

inline MessageProfile trivial_ne(const Scenario& s) {
  return MessageProfile{std::vector<Message>(s.size(), Message{0.0, 0.0})};
}

/// The message profile (e*, lambda*) built from a centralized solution.
inline MessageProfile profile_from_solution(const CentralizedSolution& sol) {
  MessageProfile m;
  m.messages.reserve(sol.profile.e.size());
  for (double e : sol.profile.e) m.messages.push_back({e, sol.certificate.lambda});
  return m;
}

/// Mean of the proposed prices; equals the common price at a non-trivial NE.
inline double reference_price(const MessageProfile& profile) {
  if (profile.size() == 0) return 0.0;
  double sum = 0.0;
  for (const auto& m : profile.messages) sum += m.p;
  return sum / static_cast<double>(profile.size());
}

struct Lemma1Residuals {
  double price = 0.0;           // reference price p*
  double price_same = 0.0;      // max_i |p_i - p_{i+1}|
  double vareps0 = 0.0;         // |p* (sum e - D0)|
  double tax_equ = 0.0;         // max_i |t_i - p* e_i|
  double tax_derivative = 0.0;  // max_i |dt_i/de_i - p*|
  bool pass = false;

  double max() const {
    return std::max({price_same, vareps0, tax_equ, tax_derivative});
  }
};

/// Checks the four identities every non-trivial NE satisfies: common price,
/// zero imbalance cost, t_i = p* e_i, and dt_i/de_i = p*.
inline Lemma1Residuals audit_lemma1(const MessageProfile& profile, const Scenario& s,
                                    double tol) {
  if (profile.size() != s.size()) {
    throw std::invalid_argument("audit_lemma1: profile length mismatch");
  }
  Lemma1Residuals r;
  r.price = reference_price(profile);
  const Allocation a = outcome(profile, s);
  const double d = imbalance(profile, s.demand);
  r.vareps0 = std::abs(r.price * d);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double own = profile[i].p;
    const double next = profile.next_price(i);
    r.price_same = std::max(r.price_same, std::abs(own - next));
    r.tax_equ = std::max(r.tax_equ, std::abs(a.t[i] - r.price * a.e[i]));
    // d/de_i of -2 p_i (D0 - sum e)^2 is +4 p_i (D0 - sum e).
    const double dt = next + 4.0 * own * d;
    r.tax_derivative = std::max(r.tax_derivative, std::abs(dt - r.price));
  }
  r.pass = r.max() <= tol;
  return r;
}

struct FeatureCheck {
  bool pass = false;
  double residual = 0.0;
};

struct FeatureAudit {
  FeatureCheck feasibility;             // sum e = D0
  FeatureCheck individual_rationality;  // F1
  FeatureCheck budget_balance;          // F2
  FeatureCheck price_efficiency;        // F3
  FeatureCheck centralized_optimality;  // F4
  std::vector<double> utilities;
  double price = 0.0;
  double optimal_cost = 0.0;
  // Implied bound multipliers: mu_i = p* - C_i'(x_i) for producers at
  // capacity, nu_i = C_i'(0) - p* for idle producers, 0 otherwise.
  std::vector<double> capacity_premium;
  std::vector<double> idle_margin;
  // Producers whose price was compared against marginal cost.
  std::vector<std::size_t> interior;

  bool all_pass() const {
    return feasibility.pass && individual_rationality.pass && budget_balance.pass &&
           price_efficiency.pass && centralized_optimality.pass;
  }
};

inline FeatureAudit audit_features(const MessageProfile& profile, const Scenario& s,
                                   double tol, double solver_tol = kDefaultSolverTol) {
  if (profile.size() != s.size()) {
    throw std::invalid_argument("audit_features: profile length mismatch");
  }
  FeatureAudit out;
  const std::size_t n = s.size();
  const Allocation a = outcome(profile, s);

  const double gap = std::abs(total_energy(a.e) - s.demand);
  out.feasibility = {gap <= tol, gap};

  out.utilities = producer_utilities(profile, s);
  double worst = 0.0;
  for (double u : out.utilities) worst = std::max(worst, -u);
  out.individual_rationality = {worst <= tol, worst};

  const BudgetLedger ledger = budget_ledger(a, profile);
  out.budget_balance = {ledger.net == 0.0, std::abs(ledger.net)};

  out.price = reference_price(profile);
  out.capacity_premium.assign(n, 0.0);
  out.idle_margin.assign(n, 0.0);
  double f3 = std::abs(a.consumer_payment - out.price * s.demand);
  bool multipliers_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = s.producers[i];
    const double e = a.e[i];
    if (e > tol && e < p.capacity - tol) {
      out.interior.push_back(i);
      f3 = std::max(f3, std::abs(out.price - marginal(p.cost, e)));
    } else if (e >= p.capacity - tol) {
      out.capacity_premium[i] = out.price - marginal(p.cost, p.capacity);
      multipliers_ok = multipliers_ok && out.capacity_premium[i] >= -tol;
    } else {
      out.idle_margin[i] = marginal(p.cost, 0.0) - out.price;
      multipliers_ok = multipliers_ok && out.idle_margin[i] >= -tol;
    }
  }
  out.price_efficiency = {f3 <= tol && multipliers_ok, f3};

  out.optimal_cost = solve_max1(s, solver_tol).total_cost(s);
  const double cost_gap = std::abs(total_cost(s, a.e) - out.optimal_cost);
  out.centralized_optimality = {cost_gap <= tol, cost_gap};
  return out;
}

struct EquilibriumReport {
  MessageProfile profile;
  EquilibriumKind kind = EquilibriumKind::kTrivial;
  double epsilon = 0.0;
  bool certified = false;
  Lemma1Residuals lemma1;
  FeatureAudit features;
};

inline EquilibriumReport analyze_equilibrium(const MessageProfile& profile,
                                             EquilibriumKind kind, const Scenario& s,
                                             const EquilibriumConfig& cfg = {}) {
  EquilibriumReport r;
  r.profile = profile;
  r.kind = kind;
  r.epsilon = verify_epsilon_ne(profile, s, cfg.search);
  r.certified = r.epsilon <= cfg.epsilon_threshold;
  r.lemma1 = audit_lemma1(profile, s, cfg.audit_tol);
  r.features = audit_features(profile, s, cfg.audit_tol, cfg.solver_tol);
  return r;
}

inline EquilibriumReport trivial_report(const Scenario& s,
                                        const EquilibriumConfig& cfg = {}) {
  return analyze_equilibrium(trivial_ne(s), EquilibriumKind::kTrivial, s, cfg);
}

/// Builds the non-trivial NE from the centralized optimum and certifies it.
inline EquilibriumReport construct_ne(const Scenario& s,
                                      const EquilibriumConfig& cfg = {}) {
  require_valid(s);
  if (!(s.demand > 0.0)) {
    throw std::invalid_argument("construct_ne: requires positive demand");
  }
  const CentralizedSolution sol = solve_max1(s, cfg.solver_tol);
  return analyze_equilibrium(profile_from_solution(sol), EquilibriumKind::kNontrivial,
                             s, cfg);
}

}  // namespace poolmech
