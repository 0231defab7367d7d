#pragma once

// Producer cost functions for the electricity pool.
//
// A cost is a polynomial C(e) = c_1 e + c_2 e^2 + ... + c_d e^d with no
// constant term. Accepted costs are strictly increasing and strictly convex
// on e > 0, which makes the marginal cost C'(e) strictly increasing and lets
// every module invert it with a monotone root-find.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace poolmech {

/// Clause of the cost-function contract that a coefficient list violates.
enum class CostClause {
  kNone,
  kEmpty,
  kNonFinite,
  kNegativeCoefficient,
  kLinearTermNotPositive,
  kNotStrictlyConvex,
};

inline const char* to_string(CostClause clause) {
  switch (clause) {
    case CostClause::kNone: return "ok";
    case CostClause::kEmpty: return "C(0) = 0 with at least one term";
    case CostClause::kNonFinite: return "finite coefficients";
    case CostClause::kNegativeCoefficient: return "non-negative coefficients";
    case CostClause::kLinearTermNotPositive: return "c_1 > 0";
    case CostClause::kNotStrictlyConvex: return "strict convexity";
  }
  return "unknown";
}

struct CostValidation {
  CostClause clause = CostClause::kNone;
  std::string message;

  bool ok() const { return clause == CostClause::kNone; }
  explicit operator bool() const { return ok(); }
};

/// Polynomial production cost. coefficients()[k] multiplies e^(k+1).
///
/// Construction does not validate; call validate() (or build a Scenario,
/// which does) before relying on monotonicity of marginal().
class CostFunction {
 public:
  CostFunction() = default;
  explicit CostFunction(std::vector<double> coefficients)
      : coefficients_(std::move(coefficients)) {}
  CostFunction(std::initializer_list<double> coefficients)
      : coefficients_(coefficients) {}

  const std::vector<double>& coefficients() const { return coefficients_; }
  std::size_t degree() const { return coefficients_.size(); }

  friend bool operator==(const CostFunction&, const CostFunction&) = default;

 private:
  std::vector<double> coefficients_;
};

struct Producer {
  int id = 0;
  double capacity = 0.0;  // MWh
  CostFunction cost;

  friend bool operator==(const Producer&, const Producer&) = default;
};

inline CostValidation validate(const CostFunction& cost) {
  const auto& c = cost.coefficients();
  if (c.empty()) {
    return {CostClause::kEmpty, "cost has no terms"};
  }
  bool convex_term = false;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!std::isfinite(c[k])) {
      return {CostClause::kNonFinite,
              "coefficient c_" + std::to_string(k + 1) + " is not finite"};
    }
    if (c[k] < 0.0) {
      return {CostClause::kNegativeCoefficient,
              "coefficient c_" + std::to_string(k + 1) + " is negative"};
    }
    if (k >= 1 && c[k] > 0.0) convex_term = true;
  }
  if (!(c[0] > 0.0)) {
    return {CostClause::kLinearTermNotPositive,
            "c_1 > 0 required (marginal cost must be positive at e = 0)"};
  }
  if (!convex_term) {
    return {CostClause::kNotStrictlyConvex,
            "strict convexity requires some c_k > 0 with k >= 2"};
  }
  return {};
}

namespace detail {

inline void require_nonnegative(double e, const char* what) {
  if (!(e >= 0.0)) {
    throw std::invalid_argument(std::string(what) +
                                ": energy must be non-negative");
  }
}

}  // namespace detail

/// C(e), Horner form.
inline double eval(const CostFunction& cost, double e) {
  detail::require_nonnegative(e, "eval");
  const auto& c = cost.coefficients();
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) {
    acc = (acc + c[k]) * e;
  }
  return acc;
}

/// C'(e).
inline double marginal(const CostFunction& cost, double e) {
  detail::require_nonnegative(e, "marginal");
  const auto& c = cost.coefficients();
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) {
    acc = acc * e + static_cast<double>(k + 1) * c[k];
  }
  return acc;
}

/// C''(e).
inline double curvature(const CostFunction& cost, double e) {
  detail::require_nonnegative(e, "curvature");
  const auto& c = cost.coefficients();
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) {
    acc = acc * e + static_cast<double>((k + 1) * k) * c[k];
  }
  return acc;
}

inline constexpr double kInverseMarginalTol = 1e-12;
inline constexpr int kInverseMarginalMaxIter = 200;

/// Solves C'(e) = lambda for e, clamped to [0, cap].
///
/// Bisection on [0, cap]; exact 0 is returned when C'(0) >= lambda and exact
/// cap when C'(cap) <= lambda, so callers can detect the bounds by equality.
inline double inverse_marginal(const CostFunction& cost, double lambda,
                               double cap) {
  if (!(lambda >= 0.0) || !(cap > 0.0)) {
    throw std::invalid_argument(
        "inverse_marginal: requires lambda >= 0 and cap > 0");
  }
  if (marginal(cost, 0.0) >= lambda) return 0.0;
  if (marginal(cost, cap) <= lambda) return cap;
  double lo = 0.0;
  double hi = cap;
  for (int it = 0; it < kInverseMarginalMaxIter && hi - lo > kInverseMarginalTol;
       ++it) {
    const double mid = 0.5 * (lo + hi);
    if (marginal(cost, mid) < lambda) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace poolmech
