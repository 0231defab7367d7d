// poolmech: clear an inelastic-demand electricity pool, evaluate the
// mechanism's outcome, and certify or search for its Nash equilibria.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "poolmech/cli.hpp"

int main(int argc, char** argv) {
  using poolmech::cli::Command;
  poolmech::cli::RunConfig cfg;
  std::string out_path;
  std::string csv_path;

  CLI::App app{"Electricity pool mechanism laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--tol", cfg.solver_tol, "Solver tolerance on |S(lambda) - D0|");
  app.add_option("--grid", cfg.grid, "Best-response grid points per producer");
  app.add_option("--epsilon", cfg.epsilon_threshold, "Certification threshold for epsilon-NE");
  app.add_option("--audit-tol", cfg.audit_tol, "Tolerance for stationarity and feature audits");
  app.add_flag("--strict-audit", cfg.strict_audit, "Exit 2 when an audit fails");
  app.add_flag("--relax-n", cfg.relax_n, "Allow fewer than four producers");
  app.add_option("--schedule", cfg.schedule, "Dynamics schedule")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, poolmech::Schedule>{
              {"seq", poolmech::Schedule::kSequential},
              {"sim", poolmech::Schedule::kSimultaneous}},
          CLI::ignore_case));
  app.add_option("--max-iter", cfg.max_iter, "Dynamics sweep budget");
  app.add_option("--conv-tol", cfg.conv_tol, "Dynamics convergence tolerance");
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--format", cfg.format, "Output format")
      ->check(CLI::IsMember({"json", "table"}));
  app.add_option("--oracle-step", cfg.oracle_step, "Grid step of the reference oracle");

  struct Sub {
    Command cmd;
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {Command::kSolve, "solve", "Centralized optimum with KKT certificate"},
      {Command::kOutcome, "outcome", "Allocation and ledger for a message profile"},
      {Command::kEquilibrium, "equilibrium", "Trivial and non-trivial equilibrium reports"},
      {Command::kVerify, "verify", "Epsilon-NE certificate for a message profile"},
      {Command::kDynamics, "dynamics", "Best-response iteration trajectory"},
      {Command::kReport, "report", "Consolidated audit report"},
  };
  std::map<CLI::App*, Command> commands;
  for (const auto& sub : subs) {
    CLI::App* sc = app.add_subcommand(sub.name, sub.help);
    sc->add_option("scenario", cfg.scenario_path, "Scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    if (sub.cmd == Command::kOutcome || sub.cmd == Command::kVerify) {
      sc->add_option("--messages", cfg.messages_path, "Message-profile JSON file")
          ->required()
          ->check(CLI::ExistingFile);
    }
    if (sub.cmd == Command::kDynamics) {
      sc->add_option("--messages", cfg.messages_path, "Start profile for --init file")
          ->check(CLI::ExistingFile);
      sc->add_option("--init", cfg.init, "Start profile")
          ->check(CLI::IsMember({"trivial", "nontrivial", "random", "file"}));
      sc->add_option("--seed", cfg.seed, "Seed for --init random");
      sc->add_option("--csv", csv_path, "Export the trajectory as CSV");
    }
    commands[sc] = sub.cmd;
  }

  CLI11_PARSE(app, argc, argv);

  Command cmd = Command::kSolve;
  for (const auto& [sc, c] : commands) {
    if (sc->parsed()) cmd = c;
  }

  const poolmech::cli::CommandResult res = poolmech::cli::run_command(cmd, cfg);
  if (!res.error.empty()) {
    std::cerr << "poolmech: " << res.error << '\n';
    return res.exit_code;
  }

  const std::string text = poolmech::cli::render(res.report, cfg.format);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    poolmech::io::write_file(out_path, text);
  }
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    poolmech::io::write_trajectory_csv(csv, res.trajectory);
  }
  if (res.exit_code == poolmech::cli::kAuditFailed) {
    std::cerr << "poolmech: audit failed\n";
  }
  return res.exit_code;
}
