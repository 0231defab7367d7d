#pragma once

// Command driver behind the `poolmech` executable. Each command loads its
// inputs, runs the library, and returns a JSON report plus an exit status,
// so the whole pipeline is testable without spawning a process.

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "poolmech/centralized_solver.hpp"
#include "poolmech/dynamics.hpp"
#include "poolmech/equilibrium.hpp"
#include "poolmech/io.hpp"
#include "poolmech/mechanism.hpp"
#include "poolmech/scenario.hpp"

namespace poolmech::cli {

using io::json;

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kAuditFailed = 2,
};

enum class Command { kSolve, kOutcome, kEquilibrium, kVerify, kDynamics, kReport };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::kSolve: return "solve";
    case Command::kOutcome: return "outcome";
    case Command::kEquilibrium: return "equilibrium";
    case Command::kVerify: return "verify";
    case Command::kDynamics: return "dynamics";
    case Command::kReport: return "report";
  }
  return "unknown";
}

struct RunConfig {
  double solver_tol = kDefaultSolverTol;
  double epsilon_threshold = 1e-4;
  double audit_tol = 1e-6;
  std::size_t grid = 4001;
  Schedule schedule = Schedule::kSequential;
  std::size_t max_iter = 200;
  double conv_tol = 1e-9;
  bool strict_audit = false;
  bool relax_n = false;
  std::string format = "json";  // json | table
  double oracle_step = 0.005;

  std::string scenario_path;
  std::string messages_path;
  std::string init = "trivial";  // dynamics start: trivial | nontrivial | random | file
  std::uint64_t seed = 1;
};

inline std::vector<std::string> check_config(const RunConfig& cfg) {
  std::vector<std::string> errors;
  if (!(cfg.solver_tol > 0.0)) errors.push_back("solver tolerance must be > 0");
  if (!(cfg.epsilon_threshold > 0.0)) errors.push_back("certification threshold must be > 0");
  if (!(cfg.audit_tol > 0.0)) errors.push_back("audit tolerance must be > 0");
  if (!(cfg.conv_tol > 0.0)) errors.push_back("convergence tolerance must be > 0");
  if (!(cfg.oracle_step > 0.0)) errors.push_back("oracle step must be > 0");
  if (cfg.grid < 3) errors.push_back("grid density must be >= 3");
  if (cfg.max_iter < 1) errors.push_back("max-iter must be >= 1");
  if (cfg.format != "json" && cfg.format != "table") {
    errors.push_back("format must be json or table");
  }
  return errors;
}

inline EquilibriumConfig equilibrium_config(const RunConfig& cfg) {
  EquilibriumConfig e;
  e.solver_tol = cfg.solver_tol;
  e.epsilon_threshold = cfg.epsilon_threshold;
  e.audit_tol = cfg.audit_tol;
  e.search.grid = cfg.grid;
  return e;
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) {
    ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return ss.str();
}

inline json provenance(Command cmd, const RunConfig& cfg) {
  json inputs = {{"scenario",
                  {{"path", cfg.scenario_path},
                   {"sha256", sha256_hex(io::read_file(cfg.scenario_path))}}}};
  if (!cfg.messages_path.empty()) {
    inputs["messages"] = {{"path", cfg.messages_path},
                          {"sha256", sha256_hex(io::read_file(cfg.messages_path))}};
  }
  return {{"command", to_string(cmd)},
          {"config",
           {{"tol", cfg.solver_tol},
            {"epsilon_threshold", cfg.epsilon_threshold},
            {"audit_tol", cfg.audit_tol},
            {"grid", cfg.grid},
            {"schedule", to_string(cfg.schedule)},
            {"max_iter", cfg.max_iter},
            {"conv_tol", cfg.conv_tol},
            {"strict_audit", cfg.strict_audit},
            {"relax_n", cfg.relax_n},
            {"oracle_step", cfg.oracle_step},
            {"init", cfg.init},
            {"seed", cfg.seed}}},
          {"inputs", inputs}};
}

struct CommandResult {
  int exit_code = kOk;
  json report;
  Trajectory trajectory;  // dynamics only
  std::string error;
};

/// Compares a fixture's reference solution against the certified optimum
/// and a grid oracle.
inline json reference_comparison(const Scenario& s, const CentralizedSolution& sol,
                                 const RunConfig& cfg) {
  const ReferenceSolution& ref = *s.reference;
  json out;
  out["reference_production"] = io::nums(ref.production);
  out["reference_price"] = io::num(ref.price);

  bool in_box = true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    in_box = in_box && ref.production[i] >= 0.0 &&
             ref.production[i] <= s.producers[i].capacity;
  }
  const double ref_sum = total_energy(ref.production);
  const double ref_cost = in_box ? total_cost(s, ref.production) : 0.0;
  out["reference_feasible"] = in_box && ref_sum >= s.demand - cfg.solver_tol;
  out["reference_cost"] = io::num(ref_cost);

  if (in_box) {
    // Multipliers implied by the reference price, not floored at zero, so a
    // negative one shows up as a dual feasibility violation.
    KktCertificate implied;
    implied.lambda = ref.price;
    implied.mu.assign(s.size(), 0.0);
    implied.nu.assign(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double mc = marginal(s.producers[i].cost, ref.production[i]);
      if (ref.production[i] == s.producers[i].capacity) implied.mu[i] = ref.price - mc;
      if (ref.production[i] == 0.0) implied.nu[i] = mc - ref.price;
    }
    out["reference_kkt"] = {{"mu", io::nums(implied.mu)},
                            {"nu", io::nums(implied.nu)},
                            {"residuals",
                             io::to_json(kkt_residual(s, ProductionProfile{ref.production},
                                                      implied))}};
  }

  const double solver_cost = sol.total_cost(s);
  out["solver_cost"] = io::num(solver_cost);
  out["solver_lambda"] = io::num(sol.certificate.lambda);
  out["price_gap"] = io::num(sol.certificate.lambda - ref.price);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    max_dev = std::max(max_dev, std::abs(sol.profile.e[i] - ref.production[i]));
  }
  out["solver_max_deviation"] = io::num(max_dev);
  out["solver_beats_reference"] = solver_cost < ref_cost - cfg.solver_tol;

  try {
    const ProductionProfile grid = brute_force_oracle(s, cfg.oracle_step);
    const double grid_cost = total_cost(s, grid.e);
    out["oracle"] = {{"step", cfg.oracle_step},
                     {"production", io::nums(grid.e)},
                     {"cost", io::num(grid_cost)}};
    out["oracle_beats_reference"] = grid_cost < ref_cost - cfg.solver_tol;
    out["oracle_matches_reference"] = std::abs(grid_cost - ref_cost) <= cfg.solver_tol;
  } catch (const std::exception& e) {
    out["oracle"] = {{"step", cfg.oracle_step}, {"error", e.what()}};
  }
  return out;
}

inline bool equilibrium_ok(const EquilibriumReport& r) {
  if (!r.certified) return false;
  if (r.kind == EquilibriumKind::kTrivial) return true;
  return r.lemma1.pass && r.features.all_pass();
}

inline MessageProfile dynamics_start(const Scenario& s, const RunConfig& cfg) {
  if (cfg.init == "trivial") return trivial_ne(s);
  if (cfg.init == "nontrivial") return profile_from_solution(solve_max1(s, cfg.solver_tol));
  if (cfg.init == "file") {
    if (cfg.messages_path.empty()) throw std::invalid_argument("--init file needs --messages");
    return io::load_profile(cfg.messages_path, s);
  }
  if (cfg.init == "random") {
    const double lambda = s.demand > 0.0 ? solve_max1(s, cfg.solver_tol).certificate.lambda : 1.0;
    std::mt19937_64 rng(cfg.seed);
    MessageProfile m;
    for (const auto& p : s.producers) {
      std::uniform_real_distribution<double> e(0.0, p.capacity);
      std::uniform_real_distribution<double> price(0.0, 2.0 * lambda);
      const double ev = e(rng);
      m.messages.push_back({ev, price(rng)});
    }
    return m;
  }
  throw std::invalid_argument("unknown --init " + cfg.init);
}

inline CommandResult run_command(Command cmd, const RunConfig& cfg) {
  CommandResult res;
  if (auto errors = check_config(cfg); !errors.empty()) {
    res.exit_code = kInputError;
    for (const auto& e : errors) res.error += e + "; ";
    return res;
  }
  try {
    const Scenario s = io::load_scenario(cfg.scenario_path, cfg.relax_n);
    const EquilibriumConfig ecfg = equilibrium_config(cfg);
    json& r = res.report;
    bool audit_ok = true;

    switch (cmd) {
      case Command::kSolve: {
        const CentralizedSolution sol = solve_max1(s, cfg.solver_tol);
        r["solution"] = io::to_json(sol, s);
        audit_ok = sol.certificate.residual.max() <= 10.0 * cfg.solver_tol;
        break;
      }
      case Command::kOutcome: {
        if (cfg.messages_path.empty()) throw std::invalid_argument("outcome needs --messages");
        const MessageProfile m = io::load_profile(cfg.messages_path, s);
        const Allocation a = outcome(m, s);
        const BudgetLedger ledger = budget_ledger(a, m);
        const SocialWelfare w = social_welfare(a.e, s);
        r["messages"] = io::to_json(m)["messages"];
        r["allocation"] = io::to_json(a, ledger);
        r["producer_utilities"] = io::nums(producer_utilities(m, s));
        r["consumer_utility"] = io::num(consumer_utility(a, s));
        r["social_welfare"] = {{"w1", io::num(w.with_consumers)},
                               {"w2", io::num(w.cost_only)}};
        audit_ok = ledger.net == 0.0;
        break;
      }
      case Command::kEquilibrium: {
        json list = json::array();
        const EquilibriumReport trivial = trivial_report(s, ecfg);
        list.push_back(io::to_json(trivial, s));
        audit_ok = equilibrium_ok(trivial);
        if (s.demand > 0.0) {
          const EquilibriumReport nt = construct_ne(s, ecfg);
          list.push_back(io::to_json(nt, s));
          audit_ok = audit_ok && equilibrium_ok(nt);
        }
        r["equilibria"] = list;
        break;
      }
      case Command::kVerify: {
        if (cfg.messages_path.empty()) throw std::invalid_argument("verify needs --messages");
        const MessageProfile m = io::load_profile(cfg.messages_path, s);
        json responses = json::array();
        const std::vector<double> u = producer_utilities(m, s);
        for (std::size_t i = 0; i < s.size(); ++i) {
          const BestResponse br = best_response(i, m, s, ecfg.search);
          responses.push_back({{"producer", i + 1},
                               {"utility", io::num(u[i])},
                               {"best_e_hat", io::num(br.message.e_hat)},
                               {"best_p", io::num(br.message.p)},
                               {"best_utility", io::num(br.utility)},
                               {"gain", io::num(std::max(0.0, br.utility - u[i]))}});
        }
        const double eps = verify_epsilon_ne(m, s, ecfg.search);
        r["messages"] = io::to_json(m)["messages"];
        r["epsilon"] = io::num(eps);
        r["certified"] = eps <= cfg.epsilon_threshold;
        r["best_responses"] = responses;
        r["lemma1"] = io::to_json(audit_lemma1(m, s, cfg.audit_tol));
        r["features"] = io::to_json(audit_features(m, s, cfg.audit_tol, cfg.solver_tol));
        audit_ok = eps <= cfg.epsilon_threshold;
        break;
      }
      case Command::kDynamics: {
        DynamicsConfig dcfg;
        dcfg.schedule = cfg.schedule;
        dcfg.max_iter = cfg.max_iter;
        dcfg.conv_tol = cfg.conv_tol;
        dcfg.solver_tol = cfg.solver_tol;
        dcfg.search.grid = cfg.grid;
        res.trajectory = run_dynamics(s, dynamics_start(s, cfg), dcfg);
        r["trajectory"] = io::to_json(res.trajectory);
        if (converged(res.trajectory.verdict)) {
          const double eps = verify_epsilon_ne(res.trajectory.final_profile(), s, ecfg.search);
          r["final_epsilon"] = io::num(eps);
          audit_ok = eps <= 10.0 * cfg.conv_tol;
        }
        break;
      }
      case Command::kReport: {
        const CentralizedSolution sol = solve_max1(s, cfg.solver_tol);
        r["scenario"] = io::to_json(s);
        r["solution"] = io::to_json(sol, s);
        json list = json::array();
        const EquilibriumReport trivial = trivial_report(s, ecfg);
        list.push_back(io::to_json(trivial, s));
        audit_ok = equilibrium_ok(trivial);
        if (s.demand > 0.0) {
          const EquilibriumReport nt = construct_ne(s, ecfg);
          list.push_back(io::to_json(nt, s));
          audit_ok = audit_ok && equilibrium_ok(nt);
        }
        r["equilibria"] = list;
        if (s.reference) r["reference_comparison"] = reference_comparison(s, sol, cfg);
        break;
      }
    }
    r["audit_pass"] = audit_ok;
    r["provenance"] = provenance(cmd, cfg);
    if (cfg.strict_audit && !audit_ok) res.exit_code = kAuditFailed;
  } catch (const ScenarioError& e) {
    res.exit_code = kInputError;
    res.error = e.what();
  } catch (const io::ParseError& e) {
    res.exit_code = kInputError;
    res.error = e.what();
  } catch (const std::invalid_argument& e) {
    res.exit_code = kInputError;
    res.error = e.what();
  }
  return res;
}

inline std::string render(const json& report, const std::string& format) {
  if (format == "table") {
    std::ostringstream ss;
    io::render_table(ss, report);
    return ss.str();
  }
  return report.dump(2) + "\n";
}

}  // namespace poolmech::cli
