#include "pqgate/experiments.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "pqgate/bounds.hpp"
#include "pqgate/parallel.hpp"
#include "pqgate/pqg.hpp"
#include "pqgate/remote.hpp"
#include "pqgate/stats.hpp"

namespace pqgate::cli {

namespace {

constexpr std::size_t kDefaultTrials = 100000;
constexpr std::size_t kDefaultLemmaInstances = 1000;
constexpr int kDefaultFidelityGrid = 32;
constexpr int kDefaultBoundsGrid = 32;
constexpr int kMaxRoundsCap = 4096;
constexpr int kRegisterTableRows = 8;
constexpr double kBranchTol = 1e-10;
// Absolute slack for rows whose Monte Carlo spread vanishes (E = U exactly).
constexpr double kAgreementFloor = 1e-12;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stream roots, so the different draws of one command never share a stream.
enum Stream : std::uint64_t { trials_stream = 0, rows_stream, lemma_stream, remark_stream, pairs_stream };

struct Trial {
  Rng rng;
  double alpha;
  StateVectord data;
};

Trial draw_trial(const ExperimentConfig& cfg, std::size_t k) {
  Rng rng(*cfg.seed, {trials_stream, k});
  const double alpha = cfg.alpha ? *cfg.alpha : kTwoPi * rng.uniform();
  StateVectord data = haar_random_qubit(rng);
  return {rng, alpha, std::move(data)};
}

StateVectord rotated(const StateVectord& data, const GateMatrixd& u) { return apply_gate(data, u, {0}); }

Json proportion_json(const stats::ProportionCheck& c) {
  return {{"observed", c.observed}, {"expected", c.expected}, {"sigma", c.sigma}, {"z", c.z}};
}

// |mean - expected| <= 3 sigma / sqrt(n) with sigma^2 the exact variance.
Json mean_check(Report& report, const std::string& name, double mean, double expected,
                double variance, std::size_t n) {
  const double se = std::sqrt(variance / static_cast<double>(n));
  const double z = se > 0.0 ? (mean - expected) / se : 0.0;
  Json measured = {{"observed", mean}, {"expected", expected}, {"sigma", se}, {"z", z}};
  report.check(name, std::abs(mean - expected) <= 3.0 * se, measured);
  return measured;
}

// Fills results with one row per observed count value plus expected
// probabilities from `law`.
template <typename Law>
void histogram_rows(Report& report, const std::string& key, const std::map<int, std::size_t>& counts,
                    std::size_t total, Law&& law) {
  for (const auto& [value, count] : counts) {
    report.results.push_back({{key, value},
                              {"count", count},
                              {"frequency", static_cast<double>(count) / static_cast<double>(total)},
                              {"expected", law(value)}});
  }
}

Json min_or_null(double value, bool any) { return any ? Json(value) : Json(nullptr); }

bool valid_ipv4_host(const std::string& host) {
  if (host == "localhost") return true;
  in_addr addr{};
  return ::inet_pton(AF_INET, host.c_str(), &addr) == 1;
}

void require_usage(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

void validate_address(const std::string& flag, const std::string& address) {
  try {
    const auto [host, port] = remote::split_address(address);
    require_usage(valid_ipv4_host(host), flag + ": host must be an IPv4 literal or localhost");
    (void)port;
  } catch (const remote::TransportError& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "run-gate") return Command::run_gate;
  if (name == "fidelity") return Command::fidelity;
  if (name == "bounds") return Command::bounds;
  if (name == "remote") return Command::remote;
  if (name == "rus") return Command::rus;
  throw UsageError("unknown command '" + name + "'");
}

std::string command_name(Command command) {
  switch (command) {
    case Command::run_gate: return "run-gate";
    case Command::fidelity: return "fidelity";
    case Command::bounds: return "bounds";
    case Command::remote: return "remote";
    case Command::rus: return "rus";
  }
  return "?";
}

std::size_t ExperimentConfig::trial_count() const {
  if (trials) return *trials;
  return command == Command::bounds ? kDefaultLemmaInstances : kDefaultTrials;
}

int ExperimentConfig::grid_size() const {
  if (grid) return *grid;
  return command == Command::bounds ? kDefaultBoundsGrid : kDefaultFidelityGrid;
}

void ExperimentConfig::validate() const {
  require_usage(seed.has_value(), "--seed is required");
  require_usage(!alpha || std::isfinite(*alpha), "--alpha must be finite");
  require_usage(n >= 1 && n <= pqg::kMaxProgramQubits,
                "--n must be in [1, " + std::to_string(pqg::kMaxProgramQubits) + "]");
  require_usage(!trials || *trials >= 1, "--trials must be positive");
  if (command == Command::fidelity)
    require_usage(trial_count() >= 2, "--trials must be at least 2 for a standard error");
  require_usage(!grid || (*grid >= 1 && *grid <= 4096), "--grid must be in [1, 4096]");
  if (command == Command::bounds) require_usage(grid_size() >= 2, "--grid must be at least 2 for bounds");
  require_usage(max_rounds >= 1 && max_rounds <= kMaxRoundsCap,
                "--max-rounds must be in [1, " + std::to_string(kMaxRoundsCap) + "]");
  const bool networked = !listen.empty() || !connect.empty();
  require_usage(command == Command::remote || !networked, "--listen/--connect apply to remote only");
  require_usage(command == Command::remote || !feedback, "--feedback applies to remote only");
  if (!listen.empty()) validate_address("--listen", listen);
  if (!connect.empty()) validate_address("--connect", connect);
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["command"] = command_name(command);
  j["alpha"] = alpha ? Json(*alpha) : Json(nullptr);
  j["n"] = n;
  j["trials"] = trial_count();
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  if (command == Command::fidelity || command == Command::bounds) j["grid"] = grid_size();
  j["format"] = format == Format::json ? "json" : "csv";
  if (command == Command::remote || command == Command::rus) j["max_rounds"] = max_rounds;
  if (command == Command::remote) {
    j["mode"] = feedback ? "feedback" : "unidirectional";
    j["transport"] = listen.empty() && connect.empty() ? "in-process" : "tcp";
    j["listen"] = listen;
    j["connect"] = connect;
  }
  return j;
}

// ---------------------------------------------------------------------------

Report cmd_run_gate(const ExperimentConfig& cfg) {
  cfg.validate();
  Report report;
  report.command = command_name(cfg.command);
  report.config = cfg.to_json();

  struct Row {
    bool success = false;
    int attempts = 0;
    double fidelity = 0.0;
  };
  const int n = cfg.n;
  const std::size_t trials = cfg.trial_count();
  const auto rows = parallel_map<Row>(trials, [&](std::size_t k) {
    Trial t = draw_trial(cfg, k);
    const pqg::ProgramSpec spec(t.alpha, n);
    const auto out = pqg::run_probabilistic(t.data, spec, t.rng);
    const GateMatrixd expected = out.success ? u_alpha(t.alpha) : pqg::failure_unitary(spec);
    return Row{out.success, out.attempts, state_fidelity(out.data_state, rotated(t.data, expected))};
  });

  std::size_t successes = 0;
  double attempts_sum = 0.0;
  double min_success_fid = 1.0, min_failure_fid = 1.0;
  std::map<int, std::size_t> attempts_hist;
  for (const auto& r : rows) {
    ++attempts_hist[r.attempts];
    attempts_sum += r.attempts;
    if (r.success) {
      ++successes;
      min_success_fid = std::min(min_success_fid, r.fidelity);
    } else {
      min_failure_fid = std::min(min_failure_fid, r.fidelity);
    }
  }

  // Attempts law: P(k) = 2^-k for k < N, P(N) = 2^-(N-1).
  auto attempts_law = [n](int k) { return k < n ? std::ldexp(1.0, -k) : std::ldexp(1.0, 1 - n); };
  double law_mean = 0.0, law_second = 0.0;
  for (int k = 1; k <= n; ++k) {
    law_mean += k * attempts_law(k);
    law_second += k * k * attempts_law(k);
  }
  histogram_rows(report, "attempts", attempts_hist, trials, attempts_law);

  const double expected_success = 1.0 - std::ldexp(1.0, -n);
  const auto rate = stats::proportion_check(successes, trials, expected_success);
  report.check("success_rate", rate.passed, proportion_json(rate));
  mean_check(report, "mean_attempts", attempts_sum / static_cast<double>(trials), 2.0 - std::ldexp(1.0, 1 - n),
             law_second - law_mean * law_mean, trials);
  const bool any_success = successes > 0, any_failure = successes < trials;
  report.check("success_branch_fidelity", !any_success || min_success_fid >= 1.0 - kBranchTol,
               {{"min_fidelity", min_or_null(min_success_fid, any_success)}, {"tolerance", kBranchTol}});
  report.check("failure_branch_fidelity", !any_failure || min_failure_fid >= 1.0 - kBranchTol,
               {{"min_fidelity", min_or_null(min_failure_fid, any_failure)}, {"tolerance", kBranchTol}});
  report.sections["summary"] = {{"successes", successes},
                                {"failures", trials - successes},
                                {"success_rate", rate.observed},
                                {"expected_success_rate", expected_success},
                                {"mean_attempts", attempts_sum / static_cast<double>(trials)}};
  return report;
}

Report cmd_fidelity(const ExperimentConfig& cfg) {
  cfg.validate();
  Report report;
  report.command = command_name(cfg.command);
  report.config = cfg.to_json();

  const std::vector<double> alphas = cfg.alpha ? std::vector<double>{*cfg.alpha} : bounds::angle_grid(cfg.grid_size());
  const std::size_t trials = cfg.trial_count();
  double worst_z = 0.0, worst_margin = 1.0;
  bool agree_all = true, floor_all = true;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    const pqg::ProgramSpec spec(alphas[j], cfg.n);
    const auto channel = pqg::approx_channel(spec);
    const auto target = u_alpha(spec.alpha());
    const std::uint64_t row_seed = Rng(*cfg.seed, {rows_stream, j})();
    const auto mc = pqg::avg_gate_fidelity(channel, target, pqg::MonteCarlo{trials, row_seed});
    const auto exact = pqg::avg_gate_fidelity(channel, target, pqg::ClosedForm{});
    const double diff = std::abs(mc.value - exact.value);
    const double z = mc.std_error > 0.0 ? diff / mc.std_error : 0.0;
    const bool agree = diff <= 4.0 * mc.std_error + kAgreementFloor;
    const double floor = 1.0 - spec.epsilon();
    const double margin = std::min(mc.value, exact.value) - floor;
    agree_all = agree_all && agree;
    floor_all = floor_all && margin >= 0.0;
    worst_z = std::max(worst_z, z);
    worst_margin = std::min(worst_margin, margin);
    report.results.push_back({{"alpha", spec.alpha()},
                              {"n", spec.n_qubits()},
                              {"epsilon", spec.epsilon()},
                              {"monte_carlo", mc.value},
                              {"std_error", mc.std_error},
                              {"closed_form", exact.value},
                              {"abs_z", z},
                              {"floor", floor},
                              {"agree", agree},
                              {"above_floor", margin >= 0.0}});
  }
  report.check("monte_carlo_vs_closed_form", agree_all, {{"max_abs_z", worst_z}, {"limit_sigmas", 4.0}});
  report.check("fidelity_floor", floor_all, {{"min_margin", worst_margin}});

  // The exact target as its own channel has fidelity 1.
  const double probe = alphas.front();
  const pqg::MixedUnitaryChannel identity({{1.0, u_alpha(probe)}});
  const auto self_mc = pqg::avg_gate_fidelity(identity, u_alpha(probe),
                                              pqg::MonteCarlo{std::min<std::size_t>(trials, 1000), *cfg.seed});
  const auto self_exact = pqg::avg_gate_fidelity(identity, u_alpha(probe), pqg::ClosedForm{});
  const double self_dev = std::max(std::abs(self_mc.value - 1.0), std::abs(self_exact.value - 1.0));
  report.check("self_fidelity", self_dev <= kExactTol, {{"max_deviation", self_dev}});
  return report;
}

Report cmd_bounds(const ExperimentConfig& cfg) {
  cfg.validate();
  Report report;
  report.command = command_name(cfg.command);
  report.config = cfg.to_json();

  const auto grid = bounds::angle_grid(cfg.grid_size());
  std::vector<int> ns(static_cast<std::size_t>(cfg.n));
  for (int l = 0; l < cfg.n; ++l) ns[l] = l + 1;
  const auto rows = bounds::bound_scan(grid, grid, ns, bounds::GateKind::probabilistic);
  const auto summary = bounds::summarize(rows);
  std::size_t guard_rows = 0;
  std::map<int, double> constant_by_n, overlap_by_n;
  for (const auto& r : rows) {
    report.results.push_back({{"alpha", r.alpha},
                              {"beta", r.beta},
                              {"n", r.n},
                              {"overlap_re", r.overlap.real()},
                              {"overlap_im", r.overlap.imag()},
                              {"abs_overlap", std::abs(r.overlap)},
                              {"distance", r.distance},
                              {"epsilon", r.epsilon},
                              {"bound_ratio", r.bound_ratio ? Json(*r.bound_ratio) : Json(nullptr)}});
    if (!r.bound_ratio) {
      ++guard_rows;
      continue;
    }
    constant_by_n[r.n] = std::max(constant_by_n[r.n], *r.bound_ratio);
    overlap_by_n[r.n] = std::max(overlap_by_n[r.n], std::abs(r.overlap));
  }
  report.check("overlap_monotone_in_n", summary.overlap_monotone, {{"rows", summary.rows}});
  // Rows with alpha == beta have zero distance and carry no ratio.
  const bool guard_ok = guard_rows == grid.size() * ns.size() && summary.ratio_rows + guard_rows == summary.rows;
  report.check("equal_angle_rows_excluded", guard_ok, {{"excluded_rows", guard_rows}});

  Json constants = Json::array();
  for (const auto& [n, k] : constant_by_n)
    constants.push_back({{"n", n}, {"max_abs_overlap", overlap_by_n[n]}, {"empirical_constant", k}});
  report.sections["empirical_constants"] = constants;

  // Register-size bound for the constructed gate: N >= (tau/2) log2(1/eps).
  Json table = Json::array();
  bool table_ok = true;
  for (int n = 1; n <= kRegisterTableRows; ++n) {
    const double eps = std::ldexp(1.0, -n);
    const double need_p = bounds::min_register_qubits(eps, bounds::GateKind::probabilistic);
    const double need_a = bounds::min_register_qubits(eps, bounds::GateKind::approximate);
    const bool ok = n >= need_p && n >= need_a;
    table_ok = table_ok && ok;
    table.push_back({{"n", n}, {"epsilon", eps}, {"min_qubits_probabilistic", need_p},
                     {"min_qubits_approximate", need_a}, {"satisfied", ok}});
  }
  report.sections["register_table"] = table;
  report.check("register_bound", table_ok, {{"rows", kRegisterTableRows}});

  Rng lemma_rng(*cfg.seed, {lemma_stream});
  const auto battery = bounds::lemma_battery(cfg.trial_count(), lemma_rng);
  report.check("lemma_full_rank", battery.violations == 0,
               {{"instances", battery.instances},
                {"rejected", battery.rejected},
                {"violations", battery.violations},
                {"largest_overlap", battery.largest_overlap}});

  Rng remark_rng(*cfg.seed, {remark_stream});
  const auto remark = bounds::remark_statistic(64, 0.05, 200, remark_rng);
  report.sections["remark"] = {{"q", 64}, {"nu", 0.05}, {"samples", 200}, {"mean_radius", remark.mean},
                               {"max_radius", remark.max}, {"nu_sqrt_q", remark.heuristic}};

  const std::size_t pairs = 10 * cfg.trial_count();
  const auto deviations = parallel_map<double>(pairs, [&](std::size_t k) {
    Rng rng(*cfg.seed, {pairs_stream, k});
    const double a = kTwoPi * rng.uniform();
    const double b = kTwoPi * rng.uniform();
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.n));
    return std::abs(bounds::program_overlap(a, b, n) - bounds::program_overlap_direct(a, b, n));
  });
  const double worst = *std::max_element(deviations.begin(), deviations.end());
  report.check("overlap_formula", worst <= kExactTol, {{"pairs", pairs}, {"max_deviation", worst}});
  return report;
}

Report cmd_remote(const ExperimentConfig& cfg) {
  cfg.validate();
  Report report;
  report.command = command_name(cfg.command);
  report.config = cfg.to_json();

  remote::Transport transport;
  if (!cfg.listen.empty() || !cfg.connect.empty()) {
    transport.kind = remote::Transport::Kind::tcp;
    transport.listen = cfg.listen.empty() ? cfg.connect : cfg.listen;
    transport.connect = cfg.connect;
  }
  std::optional<remote::TcpListener> listener;
  if (transport.kind == remote::Transport::Kind::tcp) transport.listener = &listener.emplace(transport.listen);
  const auto mode = cfg.feedback ? remote::Mode::feedback : remote::Mode::unidirectional;

  struct Row {
    remote::ResourceLedger ledger;
    int rounds_used = 0;
    bool succeeded = false;
    double fidelity = 0.0;
    std::size_t bob_frames = 0;
    std::size_t alice_frames = 0;
  };
  auto session = [&](std::size_t k) {
    Trial t = draw_trial(cfg, k);
    remote::SessionConfig sc{t.alpha, cfg.max_rounds, mode, {*cfg.seed, k}};
    remote::TransportLog log;
    const auto result = remote::remote_control_session(t.data, sc, transport, &log);
    Row row{result.ledger, result.rounds_used, result.succeeded, 0.0,
            log.count_from(remote::Party::bob), log.count_from(remote::Party::alice)};
    if (result.succeeded) row.fidelity = state_fidelity(result.final_state, rotated(t.data, u_alpha(t.alpha)));
    return row;
  };
  const std::size_t trials = cfg.trial_count();
  // A fixed listen port admits one session at a time.
  const auto rows = parallel_map<Row>(trials, session, transport.kind == remote::Transport::Kind::tcp ? 1u : 0u);

  remote::ResourceLedger totals;
  std::map<int, std::size_t> hist;
  std::size_t bob_frames = 0, alice_frames = 0, successes = 0, mismatched = 0;
  double min_fid = 1.0;
  for (const auto& r : rows) {
    totals += r.ledger;
    ++hist[r.rounds_used];
    bob_frames += r.bob_frames;
    alice_frames += r.alice_frames;
    if (r.ledger.ebits_used != r.ledger.cbits_sent) ++mismatched;
    if (r.succeeded) {
      ++successes;
      min_fid = std::min(min_fid, r.fidelity);
    }
  }
  const int max_rounds = cfg.max_rounds;
  histogram_rows(report, "rounds", hist, trials, [max_rounds](int k) {
    return k <= max_rounds ? std::ldexp(1.0, -k) : std::ldexp(1.0, -max_rounds);
  });

  const double n = static_cast<double>(trials);
  mean_check(report, "mean_ebits", static_cast<double>(totals.ebits_used) / n, 2.0, 2.0, trials);
  mean_check(report, "mean_cbits", static_cast<double>(totals.cbits_sent) / n, 2.0, 2.0, trials);
  report.check("one_ebit_per_cbit", mismatched == 0, {{"mismatched_sessions", mismatched}});
  report.check("final_state_fidelity", successes == 0 || min_fid >= 1.0 - kBranchTol,
               {{"min_fidelity", min_or_null(min_fid, successes > 0)}, {"tolerance", kBranchTol},
                {"succeeded", successes}});
  if (mode == remote::Mode::unidirectional)
    report.check("one_way_communication", bob_frames == 0, {{"bob_frames", bob_frames}});

  report.sections["ledger_totals"] = {{"ebits_used", totals.ebits_used},
                                      {"cbits_sent", totals.cbits_sent},
                                      {"program_qubits_delivered", totals.program_qubits_delivered},
                                      {"rounds", totals.rounds},
                                      {"prepared_ebits", totals.prepared_ebits},
                                      {"prepared_cbits", totals.prepared_cbits}};
  report.sections["transport"] = {{"alice_frames", alice_frames}, {"bob_frames", bob_frames}};
  report.sections["summary"] = {{"sessions", trials},
                                {"succeeded", successes},
                                {"exhausted", trials - successes},
                                {"mean_ebits_used", static_cast<double>(totals.ebits_used) / n},
                                {"mean_cbits_sent", static_cast<double>(totals.cbits_sent) / n},
                                {"mean_prepared_cbits", static_cast<double>(totals.prepared_cbits) / n}};
  return report;
}

Report cmd_rus(const ExperimentConfig& cfg) {
  cfg.validate();
  Report report;
  report.command = command_name(cfg.command);
  report.config = cfg.to_json();

  struct Row {
    int rounds_used = 0;
    int consumed = 0;
    bool succeeded = false;
    double fidelity = 0.0;
  };
  const std::size_t trials = cfg.trial_count();
  const auto rows = parallel_map<Row>(trials, [&](std::size_t k) {
    Trial t = draw_trial(cfg, k);
    const auto out = pqg::run_repeat_until_success(t.data, t.alpha, t.rng, cfg.max_rounds);
    const bool ok = out.succeeded(cfg.max_rounds);
    return Row{out.rounds_used, out.qubits_consumed, ok,
               ok ? state_fidelity(out.state, rotated(t.data, u_alpha(t.alpha))) : 0.0};
  });

  std::map<int, std::size_t> hist;
  double consumed = 0.0, min_fid = 1.0;
  std::size_t successes = 0;
  for (const auto& r : rows) {
    ++hist[r.rounds_used];
    consumed += r.consumed;
    if (r.succeeded) {
      ++successes;
      min_fid = std::min(min_fid, r.fidelity);
    }
  }
  const int max_rounds = cfg.max_rounds;
  histogram_rows(report, "rounds", hist, trials, [max_rounds](int k) {
    return k <= max_rounds ? std::ldexp(1.0, -k) : std::ldexp(1.0, -max_rounds);
  });

  mean_check(report, "mean_program_length", consumed / static_cast<double>(trials), 2.0, 2.0, trials);
  const auto p2 = stats::proportion_check(hist.count(2) ? hist.at(2) : 0, trials, 0.25);
  report.check("two_round_fraction", p2.passed, proportion_json(p2));
  std::map<int, std::size_t> completed;
  for (const auto& [k, c] : hist)
    if (k <= max_rounds) completed[k] = c;
  const auto fit = stats::geometric_half_fit(completed, trials);
  report.check("geometric_law", !fit.rejected,
               {{"chi_square", fit.statistic}, {"dof", fit.dof}, {"critical", fit.critical},
                {"p_value", fit.p_value}});
  report.check("success_fidelity", successes == 0 || min_fid >= 1.0 - kBranchTol,
               {{"min_fidelity", min_or_null(min_fid, successes > 0)}, {"tolerance", kBranchTol}});
  report.sections["summary"] = {{"sessions", trials},
                                {"succeeded", successes},
                                {"mean_program_length", consumed / static_cast<double>(trials)}};
  return report;
}

Report run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.command) {
    case Command::run_gate: return cmd_run_gate(cfg);
    case Command::fidelity: return cmd_fidelity(cfg);
    case Command::bounds: return cmd_bounds(cfg);
    case Command::remote: return cmd_remote(cfg);
    case Command::rus: return cmd_rus(cfg);
  }
  throw UsageError("unknown command");
}

std::string render(const Report& report, Format format) {
  if (format == Format::csv) return report.to_csv();
  return report.to_json().dump(2) + "\n";
}

}  // namespace pqgate::cli
