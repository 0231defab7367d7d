#pragma once

// Game form for the pool with inelastic demand.
//
// Each producer i sends m_i = (e_hat_i, p_i): a proposed production in
// [0, x_i] and a proposed unit price p_i >= 0. The outcome schedules
// e_i = e_hat_i and pays
//
//   t_i = p_{i+1} e_i - (p_i - p_{i+1})^2 - 2 p_i zeta^2,
//   zeta = |D0 - sum_j e_j|,  p_{N+1} = p_1,
//
// where t_i > 0 is a subsidy and t_i < 0 a tax. The payment rate p_{i+1} is
// set by the next producer in the cycle, never by i itself. Consumers pay
// sum_i t_i, so the transfers balance at every message profile.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "poolmech/scenario.hpp"

namespace poolmech {

struct Message {
  double e_hat = 0.0;  // MWh
  double p = 0.0;      // $/MWh

  friend bool operator==(const Message&, const Message&) = default;
};

struct MessageProfile {
  std::vector<Message> messages;

  std::size_t size() const { return messages.size(); }
  const Message& operator[](std::size_t i) const { return messages[i]; }
  Message& operator[](std::size_t i) { return messages[i]; }

  /// Price of the cyclic successor, p_{i+1} with p_{N+1} = p_1.
  double next_price(std::size_t i) const {
    return messages[(i + 1) % messages.size()].p;
  }

  std::vector<double> proposed_energy() const {
    std::vector<double> e(messages.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = messages[i].e_hat;
    return e;
  }

  friend bool operator==(const MessageProfile&, const MessageProfile&) = default;
};

/// Proposals this far above capacity are clamped; anything larger is rejected.
inline constexpr double kCapacitySlack = 1e-12;

/// Checks a profile against the scenario's message space and returns it with
/// marginal capacity overshoots clamped.
inline MessageProfile normalize_profile(MessageProfile profile, const Scenario& s) {
  if (profile.size() != s.size()) {
    throw std::invalid_argument("message profile has " +
                                std::to_string(profile.size()) +
                                " messages, scenario has " +
                                std::to_string(s.size()) + " producers");
  }
  for (std::size_t i = 0; i < profile.size(); ++i) {
    auto& m = profile[i];
    const double cap = s.producers[i].capacity;
    if (!std::isfinite(m.e_hat) || !std::isfinite(m.p)) {
      throw std::invalid_argument("message " + std::to_string(i) + " is not finite");
    }
    if (m.e_hat < 0.0) {
      throw std::invalid_argument("message " + std::to_string(i) +
                                  ": e_hat must be non-negative");
    }
    if (m.e_hat > cap) {
      if (m.e_hat - cap > kCapacitySlack) {
        throw std::invalid_argument("message " + std::to_string(i) +
                                    ": e_hat exceeds capacity");
      }
      m.e_hat = cap;
    }
    if (m.p < 0.0) {
      throw std::invalid_argument("message " + std::to_string(i) +
                                  ": price must be non-negative");
    }
  }
  return profile;
}

/// Signed imbalance D0 - sum(e_hat). zeta is its absolute value; the tax only
/// ever uses its square.
inline double imbalance(const MessageProfile& profile, double demand) {
  double sum = 0.0;
  for (const auto& m : profile.messages) sum += m.e_hat;
  return demand - sum;
}

inline double zeta(const MessageProfile& profile, double demand) {
  return std::abs(imbalance(profile, demand));
}

struct Allocation {
  std::vector<double> e;
  std::vector<double> t;
  double consumer_payment = 0.0;
  double zeta = 0.0;
};

namespace detail {

inline double receipt(double next_price, double e) { return next_price * e; }

inline double penalty(double own_price, double next_price, double zeta_sq) {
  const double gap = own_price - next_price;
  return -gap * gap - 2.0 * own_price * zeta_sq;
}

inline double tax(double own_price, double next_price, double e, double zeta_sq) {
  return receipt(next_price, e) + penalty(own_price, next_price, zeta_sq);
}

}  // namespace detail

inline Allocation outcome(const MessageProfile& profile, const Scenario& s) {
  if (profile.size() != s.size()) {
    throw std::invalid_argument("outcome: profile length mismatch");
  }
  const std::size_t n = profile.size();
  const double d = imbalance(profile, s.demand);
  const double zeta_sq = d * d;
  Allocation a;
  a.zeta = std::abs(d);
  a.e.resize(n);
  a.t.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.e[i] = profile[i].e_hat;
    a.t[i] = detail::tax(profile[i].p, profile.next_price(i), a.e[i], zeta_sq);
  }
  for (double ti : a.t) a.consumer_payment += ti;
  return a;
}

inline double producer_utility(std::size_t i, const MessageProfile& profile,
                               const Scenario& s) {
  if (i >= s.size()) throw std::out_of_range("producer_utility: bad index");
  const Allocation a = outcome(profile, s);
  return -eval(s.producers[i].cost, a.e[i]) + a.t[i];
}

inline std::vector<double> producer_utilities(const MessageProfile& profile,
                                              const Scenario& s) {
  const Allocation a = outcome(profile, s);
  std::vector<double> u(a.e.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = -eval(s.producers[i].cost, a.e[i]) + a.t[i];
  }
  return u;
}

inline double consumer_utility(const Allocation& a, const Scenario& s) {
  double paid = 0.0;
  for (double ti : a.t) paid += ti;
  return s.consumer_utility - paid;
}

struct SocialWelfare {
  double with_consumers = 0.0;  // u_{D0} - sum C_i(e_i)
  double cost_only = 0.0;       // -sum C_i(e_i)
};

inline SocialWelfare social_welfare(const std::vector<double>& production,
                                    const Scenario& s) {
  for (std::size_t i = 0; i < production.size() && i < s.size(); ++i) {
    if (production[i] > s.producers[i].capacity) {
      throw std::invalid_argument("social_welfare: production exceeds capacity");
    }
  }
  SocialWelfare w;
  w.cost_only = -total_cost(s, production);
  w.with_consumers = s.consumer_utility + w.cost_only;
  return w;
}

inline SocialWelfare social_welfare(const MessageProfile& profile, const Scenario& s) {
  return social_welfare(profile.proposed_energy(), s);
}

struct LedgerLine {
  double receipt = 0.0;  // t_{i,1} = p_{i+1} e_i
  double penalty = 0.0;  // t_{i,2} = -(p_i - p_{i+1})^2 - 2 p_i zeta^2
  double transfer = 0.0; // t_i
};

struct BudgetLedger {
  std::vector<LedgerLine> lines;
  double consumer_payment = 0.0;
  double net = 0.0;  // consumer_payment - sum_i t_i
};

/// Itemized transfers. The receipt/penalty split needs the prices, so the
/// ledger is built from the message profile that produced `a`.
inline BudgetLedger budget_ledger(const Allocation& a, const MessageProfile& profile) {
  if (profile.size() != a.t.size()) {
    throw std::invalid_argument("budget_ledger: profile length mismatch");
  }
  const double zeta_sq = a.zeta * a.zeta;
  BudgetLedger ledger;
  ledger.lines.resize(a.t.size());
  double paid_out = 0.0;
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    auto& line = ledger.lines[i];
    line.receipt = detail::receipt(profile.next_price(i), a.e[i]);
    line.penalty = detail::penalty(profile[i].p, profile.next_price(i), zeta_sq);
    line.transfer = a.t[i];
    paid_out += a.t[i];
  }
  ledger.consumer_payment = a.consumer_payment;
  ledger.net = ledger.consumer_payment - paid_out;
  return ledger;
}

}  // namespace poolmech
