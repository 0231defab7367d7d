#pragma once

// JSON scenario and message files, JSON reports, and CSV trajectory export.
//
// Scenario inputs are written back at full precision so that a saved
// scenario reloads identically. Computed quantities are rounded to 12
// significant digits, which keeps reports byte-stable across runs.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "poolmech/centralized_solver.hpp"
#include "poolmech/dynamics.hpp"
#include "poolmech/equilibrium.hpp"
#include "poolmech/mechanism.hpp"
#include "poolmech/scenario.hpp"

namespace poolmech::io {

using json = nlohmann::json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

/// Rounds to 12 significant digits. Non-finite values pass through.
inline double round12(double x) {
  if (x == 0.0) return 0.0;
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline json num(double x) {
  if (!std::isfinite(x)) {
    return std::isnan(x) ? json("nan") : json(x > 0 ? "inf" : "-inf");
  }
  return round12(x);
}

inline json nums(const std::vector<double>& xs) {
  json arr = json::array();
  for (double x : xs) arr.push_back(num(x));
  return arr;
}

// --- scenario files ---------------------------------------------------------

inline Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    for (const auto& p : j.at("producers")) {
      Producer prod;
      prod.id = p.at("id").get<int>();
      prod.capacity = p.at("capacity").get<double>();
      prod.cost = CostFunction(p.at("cost_coefficients").get<std::vector<double>>());
      s.producers.push_back(std::move(prod));
    }
    s.demand = j.at("demand").get<double>();
    s.consumer_utility = j.at("consumer_utility").get<double>();
    s.relax_min_producers = j.value("relax_min_producers", false);
    if (j.contains("reference")) {
      const auto& r = j.at("reference");
      s.reference = ReferenceSolution{r.at("production").get<std::vector<double>>(),
                                      r.at("price").get<double>()};
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
}

inline json to_json(const Scenario& s) {
  json producers = json::array();
  for (const auto& p : s.producers) {
    producers.push_back({{"id", p.id},
                         {"capacity", p.capacity},
                         {"cost_coefficients", p.cost.coefficients()}});
  }
  json j = {{"producers", producers},
            {"demand", s.demand},
            {"consumer_utility", s.consumer_utility},
            {"relax_min_producers", s.relax_min_producers}};
  if (s.reference) {
    j["reference"] = {{"production", s.reference->production},
                      {"price", s.reference->price}};
  }
  return j;
}

/// Parses and validates a scenario file. `relax_n` forces the relaxed
/// producer-count rule regardless of the file's own flag.
inline Scenario load_scenario(const std::string& path, bool relax_n = false) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  Scenario s = scenario_from_json(j);
  if (relax_n) s.relax_min_producers = true;
  require_valid(s);
  return s;
}

inline void save_scenario(const std::string& path, const Scenario& s) {
  write_file(path, to_json(s).dump(2) + "\n");
}

// --- message files ----------------------------------------------------------

inline MessageProfile profile_from_json(const json& j) {
  try {
    MessageProfile m;
    for (const auto& msg : j.at("messages")) {
      m.messages.push_back({msg.at("e_hat").get<double>(), msg.at("p").get<double>()});
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("messages: ") + e.what());
  }
}

inline json to_json(const MessageProfile& m) {
  json arr = json::array();
  for (const auto& msg : m.messages) {
    arr.push_back({{"e_hat", num(msg.e_hat)}, {"p", num(msg.p)}});
  }
  return {{"messages", arr}};
}

inline MessageProfile load_profile(const std::string& path, const Scenario& s) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return normalize_profile(profile_from_json(j), s);
}

// --- report sections --------------------------------------------------------

inline json to_json(const KktResidual& r) {
  return {{"stationarity", num(r.stationarity)},
          {"complementarity", num(r.complementarity)},
          {"dual_feasibility", num(r.dual_feasibility)},
          {"primal_feasibility", num(r.primal_feasibility)}};
}

inline json to_json(const CentralizedSolution& sol, const Scenario& s) {
  return {{"production", nums(sol.profile.e)},
          {"total_cost", num(sol.total_cost(s))},
          {"kkt",
           {{"lambda", num(sol.certificate.lambda)},
            {"mu", nums(sol.certificate.mu)},
            {"nu", nums(sol.certificate.nu)},
            {"residuals", to_json(sol.certificate.residual)}}}};
}

inline json to_json(const Allocation& a, const BudgetLedger& ledger) {
  json lines = json::array();
  for (const auto& l : ledger.lines) {
    lines.push_back({{"t_i1", num(l.receipt)}, {"t_i2", num(l.penalty)},
                     {"t_i", num(l.transfer)}});
  }
  return {{"production", nums(a.e)},
          {"transfers", nums(a.t)},
          {"zeta", num(a.zeta)},
          {"ledger",
           {{"lines", lines},
            {"consumer_payment", num(ledger.consumer_payment)},
            {"net", num(ledger.net)}}}};
}

inline json to_json(const Lemma1Residuals& r) {
  return {{"price", num(r.price)},
          {"price_same", num(r.price_same)},
          {"vareps0", num(r.vareps0)},
          {"tax_equ", num(r.tax_equ)},
          {"tax_der_equ", num(r.tax_derivative)},
          {"pass", r.pass}};
}

inline json to_json(const FeatureCheck& c) {
  return {{"pass", c.pass}, {"residual", num(c.residual)}};
}

inline json to_json(const FeatureAudit& f) {
  return {{"feasibility", to_json(f.feasibility)},
          {"F1_individual_rationality", to_json(f.individual_rationality)},
          {"F2_budget_balance", to_json(f.budget_balance)},
          {"F3_price_efficiency", to_json(f.price_efficiency)},
          {"F4_centralized_optimality", to_json(f.centralized_optimality)},
          {"utilities", nums(f.utilities)},
          {"price", num(f.price)},
          {"optimal_cost", num(f.optimal_cost)},
          {"capacity_premium", nums(f.capacity_premium)},
          {"idle_margin", nums(f.idle_margin)},
          {"all_pass", f.all_pass()}};
}

inline json to_json(const EquilibriumReport& r, const Scenario& s) {
  const Allocation a = outcome(r.profile, s);
  return {{"kind", to_string(r.kind)},
          {"profile", to_json(r.profile)["messages"]},
          {"epsilon", num(r.epsilon)},
          {"certified", r.certified},
          {"allocation", to_json(a, budget_ledger(a, r.profile))},
          {"lemma1", to_json(r.lemma1)},
          {"features", to_json(r.features)}};
}

inline json to_json(const Trajectory& tr) {
  json steps = json::array();
  for (std::size_t k = 0; k < tr.steps.size(); ++k) {
    steps.push_back({{"step", k},
                     {"messages", to_json(tr.steps[k])["messages"]},
                     {"distance_to_trivial", num(tr.distance_to_trivial[k])},
                     {"distance_to_nontrivial", num(tr.distance_to_nontrivial[k])}});
  }
  return {{"verdict", to_string(tr.verdict)}, {"sweeps", tr.sweeps}, {"steps", steps}};
}

/// One row per (step, producer).
inline void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  out << "step,producer,e_hat,p,distance_to_trivial,distance_to_nontrivial\n";
  auto fmt = [](double x) {
    std::ostringstream ss;
    ss << std::setprecision(12) << x;
    return ss.str();
  };
  for (std::size_t k = 0; k < tr.steps.size(); ++k) {
    for (std::size_t i = 0; i < tr.steps[k].size(); ++i) {
      out << k << ',' << i + 1 << ',' << fmt(tr.steps[k][i].e_hat) << ','
          << fmt(tr.steps[k][i].p) << ',' << fmt(tr.distance_to_trivial[k]) << ','
          << fmt(tr.distance_to_nontrivial[k]) << '\n';
    }
  }
}

// --- human-readable rendering -----------------------------------------------

namespace detail {

inline bool is_scalar_array(const json& j) {
  if (!j.is_array()) return false;
  for (const auto& x : j) {
    if (x.is_structured()) return false;
  }
  return true;
}

inline void render(std::ostream& out, const json& j, const std::string& path) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      render(out, value, path.empty() ? key : path + "." + key);
    }
  } else if (j.is_array() && !is_scalar_array(j)) {
    for (std::size_t k = 0; k < j.size(); ++k) {
      render(out, j[k], path + "[" + std::to_string(k + 1) + "]");
    }
  } else {
    out << std::left << std::setw(48) << path << ' ' << j.dump() << '\n';
  }
}

}  // namespace detail

/// Flattens a JSON report into "path value" rows.
inline void render_table(std::ostream& out, const json& report) {
  detail::render(out, report, "");
}

}  // namespace poolmech::io
