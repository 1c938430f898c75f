// Command-line front end: pqgate <command> [flags]
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pqgate/experiments.hpp"

namespace cli = pqgate::cli;

int main(int argc, char** argv) {
  CLI::App app{"Seeded experiments for programmable U_alpha gates", "pqgate"};
  app.set_version_flag("--version", cli::version_string());

  std::string command;
  std::string format = "json";
  std::optional<double> alpha;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  cli::ExperimentConfig cfg;

  app.add_option("command", command, "run-gate | fidelity | bounds | remote | rus")->required();
  app.add_option("--alpha", alpha, "rotation angle; random per trial when omitted");
  app.add_option("--n", cfg.n, "program register size N")->capture_default_str();
  app.add_option("--trials", trials, "trials, sessions or lemma instances");
  app.add_option("--seed", seed, "root seed (required)");
  app.add_option("--grid", grid, "angle grid size");
  app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--out", cfg.out, "output file (default: stdout)");
  app.add_option("--listen", cfg.listen, "remote: Alice's listen address host:port");
  app.add_option("--connect", cfg.connect, "remote: address Bob connects to");
  app.add_option("--max-rounds", cfg.max_rounds, "repeat-until-success round cap")->capture_default_str();
  app.add_flag("--feedback", cfg.feedback, "remote: Bob reports each round back to Alice");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  try {
    cfg.command = cli::parse_command(command);
    cfg.alpha = alpha;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.grid = grid;
    cfg.format = format == "csv" ? cli::Format::csv : cli::Format::json;
    cfg.validate();
  } catch (const cli::UsageError& e) {
    std::cerr << "pqgate: " << e.what() << "\nRun with --help for usage.\n";
    return cli::kExitUsage;
  }

  try {
    const auto report = cli::run_experiment(cfg);
    const std::string text = cli::render(report, cfg.format);
    if (cfg.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream file(cfg.out, std::ios::binary);
      file << text;
      if (!file) {
        std::cerr << "pqgate: cannot write " << cfg.out << "\n";
        return cli::kExitCheckFailed;
      }
    }
    for (const auto& c : report.checks)
      std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << " " << c.measured.dump() << "\n";
    return report.all_passed() ? cli::kExitOk : cli::kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "pqgate: " << e.what() << "\n";
    return cli::kExitCheckFailed;
  }
}
