#ifndef PQGATE_EXPERIMENTS_HPP
#define PQGATE_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "pqgate/report.hpp"

// Seeded batch experiments behind the command-line tool. Each command
// validates its whole configuration up front, then produces a Report whose
// content depends only on (command, flags, seed).
namespace pqgate::cli {

enum class Command { run_gate, fidelity, bounds, remote, rus };
enum class Format { json, csv };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Command parse_command(const std::string& name);
std::string command_name(Command command);

struct ExperimentConfig {
  Command command = Command::run_gate;
  // Fixed angle; when absent every trial draws its own alpha in [0, 2 pi).
  std::optional<double> alpha;
  int n = 3;
  std::optional<std::size_t> trials;  // command-specific default when absent
  std::optional<std::uint64_t> seed;  // required
  std::optional<int> grid;            // command-specific default when absent
  Format format = Format::json;
  std::string out;  // empty = stdout
  std::string listen;
  std::string connect;
  int max_rounds = 64;
  bool feedback = false;

  std::size_t trial_count() const;
  int grid_size() const;
  /// Throws UsageError on the first invalid field.
  void validate() const;
  Json to_json() const;
};

Report cmd_run_gate(const ExperimentConfig& cfg);
Report cmd_fidelity(const ExperimentConfig& cfg);
Report cmd_bounds(const ExperimentConfig& cfg);
Report cmd_remote(const ExperimentConfig& cfg);
Report cmd_rus(const ExperimentConfig& cfg);

/// Validates, then dispatches on cfg.command.
Report run_experiment(const ExperimentConfig& cfg);

std::string render(const Report& report, Format format);

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

}  // namespace pqgate::cli

#endif  // PQGATE_EXPERIMENTS_HPP
