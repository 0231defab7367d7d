#pragma once

// Centralized cost-minimizing dispatch for inelastic demand.
//
//   minimize   sum_i C_i(e_i)
//   subject to 0 <= e_i <= x_i,  sum_i e_i >= D0
//
// With strictly increasing costs the demand constraint is active, and the
// optimum is the equal-marginal-cost profile e_i = clamp(C_i'^{-1}(lambda))
// at the price lambda that clears D0. The solver bisects on lambda and emits
// the multipliers (lambda, mu, nu) together with their KKT residuals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "poolmech/cost_model.hpp"
#include "poolmech/scenario.hpp"

namespace poolmech {

struct ProductionProfile {
  std::vector<double> e;

  friend bool operator==(const ProductionProfile&,
                         const ProductionProfile&) = default;
};

/// Max-norm violations of the optimality system.
struct KktResidual {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double dual_feasibility = 0.0;
  double primal_feasibility = 0.0;

  double max() const {
    return std::max({stationarity, complementarity, dual_feasibility,
                     primal_feasibility});
  }
};

struct KktCertificate {
  double lambda = 0.0;     // price on the demand constraint
  std::vector<double> mu;  // upper capacity bounds
  std::vector<double> nu;  // lower bounds e_i >= 0
  KktResidual residual;
};

struct CentralizedSolution {
  ProductionProfile profile;
  KktCertificate certificate;

  double total_cost(const Scenario& s) const {
    return poolmech::total_cost(s, profile.e);
  }
};

inline constexpr double kDefaultSolverTol = 1e-9;

struct SolverOptions {
  double tol = kDefaultSolverTol;  // on |S(lambda) - D0|
  // Upper end of the lambda bracket as a multiple of max_i C_i'(x_i);
  // anything >= 1 brackets the root.
  double bracket_scale = 1.0;
  int max_iter = 200;
};

/// S(lambda) = sum_i clamp(C_i'^{-1}(lambda), 0, x_i).
inline double aggregate_supply(const Scenario& s, double lambda) {
  double sum = 0.0;
  for (const auto& p : s.producers) {
    sum += inverse_marginal(p.cost, lambda, p.capacity);
  }
  return sum;
}

inline KktResidual kkt_residual(const Scenario& s, const ProductionProfile& profile,
                                const KktCertificate& cert) {
  const std::size_t n = s.size();
  if (profile.e.size() != n || cert.mu.size() != n || cert.nu.size() != n) {
    throw std::invalid_argument("kkt_residual: length mismatch");
  }
  KktResidual r;
  const double gap = total_energy(profile.e) - s.demand;
  r.complementarity = std::abs(cert.lambda * gap);
  r.primal_feasibility = std::max(0.0, -gap);
  r.dual_feasibility = std::max(0.0, -cert.lambda);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = s.producers[i];
    const double e = profile.e[i];
    const double st = marginal(p.cost, e) - cert.lambda + cert.mu[i] - cert.nu[i];
    r.stationarity = std::max(r.stationarity, std::abs(st));
    r.complementarity = std::max(
        {r.complementarity, std::abs(cert.mu[i] * (p.capacity - e)),
         std::abs(cert.nu[i] * e)});
    r.dual_feasibility =
        std::max({r.dual_feasibility, -cert.mu[i], -cert.nu[i]});
  }
  return r;
}

namespace detail {

// Minimal multipliers consistent with stationarity at the given price.
inline void recover_multipliers(const Scenario& s, const std::vector<double>& e,
                                KktCertificate& cert) {
  const std::size_t n = s.size();
  cert.mu.assign(n, 0.0);
  cert.nu.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = s.producers[i];
    const double mc = marginal(p.cost, e[i]);
    if (e[i] == p.capacity) {
      cert.mu[i] = std::max(0.0, cert.lambda - mc);
    } else if (e[i] == 0.0) {
      cert.nu[i] = std::max(0.0, mc - cert.lambda);
    }
  }
}

// Moves the residual D0 - sum(e) onto interior producers in proportion to
// 1/C_i'', i.e. one Newton step on the clearing condition at fixed lambda.
inline void absorb_gap(const Scenario& s, double lambda, std::vector<double>& e) {
  const std::size_t n = s.size();
  for (int pass = 0; pass < 3; ++pass) {
    const double gap = s.demand - total_energy(e);
    if (gap == 0.0) return;
    double weight_sum = 0.0;
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (e[i] > 0.0 && e[i] < s.producers[i].capacity) {
        w[i] = 1.0 / curvature(s.producers[i].cost, e[i]);
        weight_sum += w[i];
      }
    }
    if (weight_sum == 0.0) {
      // Every producer sits on a bound: give the gap to the one whose
      // marginal cost is closest to lambda and that has room to move.
      std::size_t best = n;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const bool room = gap > 0.0 ? e[i] < s.producers[i].capacity : e[i] > 0.0;
        const double d = std::abs(marginal(s.producers[i].cost, e[i]) - lambda);
        if (room && d < best_dist) {
          best = i;
          best_dist = d;
        }
      }
      if (best == n) return;
      e[best] = std::clamp(e[best] + gap, 0.0, s.producers[best].capacity);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] > 0.0) {
        e[i] = std::clamp(e[i] + gap * w[i] / weight_sum, 0.0,
                          s.producers[i].capacity);
      }
    }
  }
}

}  // namespace detail

inline CentralizedSolution solve_max1(const Scenario& s, const SolverOptions& opt) {
  require_valid(s);
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_max1: tol must be > 0");
  if (!(opt.bracket_scale >= 1.0)) {
    throw std::invalid_argument("solve_max1: bracket_scale must be >= 1");
  }
  const std::size_t n = s.size();
  CentralizedSolution out;
  auto& e = out.profile.e;
  auto& cert = out.certificate;

  double lambda_hi = 0.0;
  for (const auto& p : s.producers) {
    lambda_hi = std::max(lambda_hi, marginal(p.cost, p.capacity));
  }

  if (s.demand == 0.0) {
    e.assign(n, 0.0);
    cert.lambda = 0.0;
  } else if (s.demand >= s.total_capacity()) {
    e.resize(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = s.producers[i].capacity;
    cert.lambda = lambda_hi;
  } else {
    double lo = 0.0;
    double hi = lambda_hi * opt.bracket_scale;
    for (int it = 0; it < opt.max_iter; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double supply = aggregate_supply(s, mid);
      if (supply == s.demand) {
        lo = hi = mid;
        break;
      }
      if (supply < s.demand) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    cert.lambda = 0.5 * (lo + hi);
    e.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = inverse_marginal(s.producers[i].cost, cert.lambda,
                              s.producers[i].capacity);
    }
    detail::absorb_gap(s, cert.lambda, e);
    if (std::abs(total_energy(e) - s.demand) > opt.tol) {
      throw std::runtime_error("solve_max1: supply did not clear demand");
    }
  }
  detail::recover_multipliers(s, e, cert);
  cert.residual = kkt_residual(s, out.profile, cert);
  return out;
}

inline CentralizedSolution solve_max1(const Scenario& s,
                                      double tol = kDefaultSolverTol) {
  SolverOptions opt;
  opt.tol = tol;
  return solve_max1(s, opt);
}

inline constexpr double kDefaultOracleCellBudget = 5e7;

/// Grid-search oracle: cheapest profile on the lattice {0, step, 2 step, ...}
/// with sum(e) >= D0, by stage-wise tabulation of "cheapest way for producers
/// i..N to produce exactly q steps". Capacities must be multiples of step.
/// Ties go to the lexicographically smallest profile.
inline ProductionProfile brute_force_oracle(
    const Scenario& s, double step,
    double cell_budget = kDefaultOracleCellBudget) {
  require_valid(s);
  if (!(step > 0.0)) throw std::invalid_argument("brute_force_oracle: step must be > 0");
  const std::size_t n = s.size();
  std::vector<long> steps(n);
  long total_steps = 0;
  long max_steps = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = s.producers[i].capacity / step;
    const long k = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, ratio)) {
      throw std::invalid_argument(
          "brute_force_oracle: capacity is not a multiple of step");
    }
    steps[i] = k;
    total_steps += k;
    max_steps = std::max(max_steps, k);
  }
  const double cells = static_cast<double>(n) *
                       static_cast<double>(total_steps + 1) *
                       static_cast<double>(max_steps + 1);
  if (cells > cell_budget) {
    throw std::invalid_argument("brute_force_oracle: tabulation exceeds cell budget");
  }
  const long q_min = std::max(
      0L, static_cast<long>(std::ceil(s.demand / step - 1e-9)));

  auto energy = [&](std::size_t i, long j) {
    return j == steps[i] ? s.producers[i].capacity : static_cast<double>(j) * step;
  };
  std::vector<std::vector<double>> unit_cost(n);
  for (std::size_t i = 0; i < n; ++i) {
    unit_cost[i].resize(steps[i] + 1);
    for (long j = 0; j <= steps[i]; ++j) {
      unit_cost[i][j] = eval(s.producers[i].cost, energy(i, j));
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // table[i][q]: cheapest cost for producers i..n-1 to produce exactly q steps.
  std::vector<std::vector<double>> table(n + 1,
                                         std::vector<double>(total_steps + 1, kInf));
  table[n][0] = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    for (long q = 0; q <= total_steps; ++q) {
      double best = kInf;
      for (long j = 0; j <= std::min(steps[i], q); ++j) {
        best = std::min(best, unit_cost[i][j] + table[i + 1][q - j]);
      }
      table[i][q] = best;
    }
  }

  long q_best = -1;
  for (long q = q_min; q <= total_steps; ++q) {
    if (q_best < 0 || table[0][q] < table[0][q_best]) q_best = q;
  }
  if (q_best < 0 || !std::isfinite(table[0][q_best])) {
    throw std::runtime_error("brute_force_oracle: no feasible grid profile");
  }

  ProductionProfile out;
  out.e.resize(n);
  long q = q_best;
  for (std::size_t i = 0; i < n; ++i) {
    for (long j = 0; j <= std::min(steps[i], q); ++j) {
      if (unit_cost[i][j] + table[i + 1][q - j] == table[i][q]) {
        out.e[i] = energy(i, j);
        q -= j;
        break;
      }
    }
  }
  return out;
}

}  // namespace poolmech
