#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pqgate/experiments.hpp"

using namespace pqgate::cli;

namespace {

ExperimentConfig config(Command command, std::uint64_t seed = 42) {
  ExperimentConfig cfg;
  cfg.command = command;
  cfg.seed = seed;
  return cfg;
}

const Json& check_named(const Json& report, const std::string& name) {
  for (const auto& c : report["checks"])
    if (c["name"] == name) return c;
  FAIL("missing check " << name);
  throw std::logic_error("unreachable");
}

int run_tool(const std::string& args, const std::string& stdout_path = "/dev/null") {
  const std::string cmd = std::string(PQGATE_CLI_PATH) + " " + args + " > " + stdout_path + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("command names") {
  for (Command c : {Command::run_gate, Command::fidelity, Command::bounds, Command::remote, Command::rus})
    CHECK(parse_command(command_name(c)) == c);
  CHECK(command_name(Command::run_gate) == "run-gate");
  CHECK_THROWS_AS(parse_command("run_gate"), UsageError);
  CHECK_THROWS_AS(parse_command(""), UsageError);
}

TEST_CASE("configuration is validated before any work") {
  auto cfg = config(Command::run_gate);
  CHECK_NOTHROW(cfg.validate());

  auto bad = cfg;
  bad.n = 0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  CHECK_THROWS_AS(run_experiment(bad), UsageError);
  bad.n = 16;
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = cfg;
  bad.seed.reset();
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = cfg;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = cfg;
  bad.alpha = std::nan("");
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad.alpha = INFINITY;
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = cfg;
  bad.max_rounds = 0;
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = cfg;
  bad.listen = "127.0.0.1:0";
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad.listen.clear();
  bad.feedback = true;
  CHECK_THROWS_AS(bad.validate(), UsageError);

  auto remote = config(Command::remote);
  remote.listen = "127.0.0.1:5000";
  CHECK_NOTHROW(remote.validate());
  remote.listen = "127.0.0.1";
  CHECK_THROWS_AS(remote.validate(), UsageError);
  remote.listen = "not-a-host:80";
  CHECK_THROWS_AS(remote.validate(), UsageError);

  auto fid = config(Command::fidelity);
  fid.trials = 1;
  CHECK_THROWS_AS(fid.validate(), UsageError);
  fid.trials = 10;
  fid.grid = 0;
  CHECK_THROWS_AS(fid.validate(), UsageError);

  auto bnd = config(Command::bounds);
  bnd.grid = 1;
  CHECK_THROWS_AS(bnd.validate(), UsageError);
  CHECK(config(Command::bounds).trial_count() == 1000);
  CHECK(config(Command::run_gate).trial_count() == 100000);
  CHECK(config(Command::fidelity).grid_size() == 32);
}

TEST_CASE("run-gate: N = 4 succeeds 15/16 of the time") {
  auto cfg = config(Command::run_gate);
  cfg.alpha = 0.7;
  cfg.n = 4;
  cfg.trials = 100000;
  const auto report = run_experiment(cfg);
  CHECK(report.all_passed());
  const auto j = report.to_json();
  const auto& rate = check_named(j, "success_rate")["measured"];
  CHECK(rate["expected"].get<double>() == 15.0 / 16);
  CHECK(std::abs(rate["observed"].get<double>() - 15.0 / 16) <= 3 * rate["sigma"].get<double>());
  std::size_t total = 0;
  for (const auto& row : j["results"]) total += row["count"].get<std::size_t>();
  CHECK(total == 100000);
  CHECK(j["results"].size() == 4);
}

TEST_CASE("reports embed config, seed and version in a fixed key order") {
  auto cfg = config(Command::rus, 7);
  cfg.trials = 2000;
  const auto j = run_experiment(cfg).to_json();
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  REQUIRE(keys.size() >= 7);
  CHECK(keys[0] == "tool");
  CHECK(keys[1] == "version");
  CHECK(keys[2] == "command");
  CHECK(keys[3] == "config");
  CHECK(keys[4] == "results");
  CHECK(keys[5] == "checks");
  CHECK(keys.back() == "all_passed");
  CHECK(j["version"] == version_string());
  CHECK(j["config"]["seed"] == 7);
  CHECK(j["config"]["trials"] == 2000);
  CHECK(j["config"]["max_rounds"] == 64);
  CHECK_FALSE(j["config"].contains("out"));
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("name"));
    CHECK(c["passed"].is_boolean());
    CHECK(c.contains("measured"));
  }
}

TEST_CASE("same seed, same bytes; different seed, different bytes") {
  for (Command c : {Command::run_gate, Command::fidelity, Command::bounds, Command::remote, Command::rus}) {
    auto cfg = config(c, 11);
    cfg.trials = c == Command::bounds ? 20 : 500;
    cfg.grid = c == Command::bounds ? 6 : 4;
    if (c != Command::fidelity && c != Command::bounds) cfg.grid.reset();
    for (Format f : {Format::json, Format::csv}) {
      const auto first = render(run_experiment(cfg), f);
      CHECK(first == render(run_experiment(cfg), f));
      auto other = cfg;
      other.seed = 12;
      // The bounds table is a deterministic scan; only its JSON sections are seeded.
      if (c != Command::bounds || f == Format::json) CHECK(first != render(run_experiment(other), f));
    }
  }
}

TEST_CASE("CSV is the flattened results table") {
  Report r;
  r.results.push_back({{"a", 1}, {"b", "x,y"}, {"c", nullptr}});
  r.results.push_back({{"a", 2.5}, {"b", "plain"}, {"c", true}});
  CHECK(r.to_csv() == "a,b,c\n1,\"x,y\",\n2.5,plain,true\n");
  CHECK(Report{}.to_csv().empty());

  auto cfg = config(Command::run_gate);
  cfg.alpha = 0.3;
  cfg.n = 2;
  cfg.trials = 1000;
  const auto csv = render(run_experiment(cfg), Format::csv);
  CHECK(csv.rfind("attempts,count,frequency,expected\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("fidelity sweep: floor, self-fidelity and estimator agreement") {
  auto cfg = config(Command::fidelity, 5);
  cfg.n = 3;
  cfg.trials = 4000;
  const auto report = run_experiment(cfg);
  CHECK(report.all_passed());
  const auto j = report.to_json();
  CHECK(j["results"].size() == 32);
  for (const auto& row : j["results"]) CHECK(row["closed_form"].get<double>() >= 1 - 1.0 / 8 - 1e-12);
  CHECK(check_named(j, "self_fidelity")["passed"] == true);
  CHECK(check_named(j, "fidelity_floor")["passed"] == true);
  CHECK(check_named(j, "monte_carlo_vs_closed_form")["passed"] == true);
}

TEST_CASE("bounds: lemma battery, register table and guard rows") {
  auto cfg = config(Command::bounds, 3);
  cfg.n = 4;
  cfg.grid = 12;
  const auto report = run_experiment(cfg);
  CHECK(report.all_passed());
  const auto j = report.to_json();
  CHECK(check_named(j, "lemma_full_rank")["measured"]["instances"] == 1000);
  CHECK(check_named(j, "lemma_full_rank")["measured"]["violations"] == 0);
  CHECK(j["register_table"].size() == 8);
  for (const auto& row : j["register_table"]) CHECK(row["satisfied"] == true);
  std::size_t guards = 0;
  for (const auto& row : j["results"])
    if (row["alpha"] == row["beta"]) {
      CHECK(row["bound_ratio"].is_null());
      ++guards;
    }
  CHECK(guards == 12 * 4);
  CHECK(j["empirical_constants"].size() == 4);
}

TEST_CASE("remote: ledger statistics and one-way traffic") {
  auto cfg = config(Command::remote, 9);
  cfg.trials = 3000;
  const auto report = run_experiment(cfg);
  CHECK(report.all_passed());
  const auto j = report.to_json();
  CHECK(j["transport"]["bob_frames"] == 0);
  CHECK(j["ledger_totals"]["ebits_used"] == j["ledger_totals"]["cbits_sent"]);
  CHECK(j["config"]["mode"] == "unidirectional");

  cfg.trials = 200;
  const auto in_process = run_experiment(cfg).to_json();
  cfg.listen = "127.0.0.1:0";
  const auto socket = run_experiment(cfg).to_json();
  CHECK(socket["ledger_totals"] == in_process["ledger_totals"]);
  CHECK(socket["results"] == in_process["results"]);

  auto fed = config(Command::remote, 9);
  fed.trials = 500;
  fed.feedback = true;
  const auto fb = run_experiment(fed).to_json();
  CHECK(fb["all_passed"] == true);
  CHECK(fb["transport"]["bob_frames"] == fb["ledger_totals"]["rounds"]);
  CHECK(fb["ledger_totals"]["prepared_cbits"] == fb["ledger_totals"]["cbits_sent"]);
}

TEST_CASE("rus: geometric round law") {
  auto cfg = config(Command::rus, 4);
  cfg.trials = 20000;
  const auto report = run_experiment(cfg);
  CHECK(report.all_passed());
  for (const auto& name : {"mean_program_length", "two_round_fraction", "geometric_law", "success_fidelity"})
    CHECK(check_named(report.to_json(), name)["passed"] == true);
}

TEST_CASE("the executable: exit codes and reproducible files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("pqgate_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto a = (dir / "a.json").string(), b = (dir / "b.json").string();

  CHECK(run_tool("run-gate --alpha 0.7 --n 4 --trials 20000 --seed 42 --out " + a) == kExitOk);
  CHECK(run_tool("run-gate --alpha 0.7 --n 4 --trials 20000 --seed 42 --out " + b) == kExitOk);
  CHECK(slurp(a) == slurp(b));
  CHECK(Json::parse(slurp(a))["config"]["seed"] == 42);

  const auto csv = (dir / "rus.csv").string();
  CHECK(run_tool("rus --n 3 --trials 2000 --seed 1 --format csv", csv) == kExitOk);
  CHECK(slurp(csv).rfind("rounds,count,frequency,expected\n", 0) == 0);

  CHECK(run_tool("run-gate --n 0 --seed 1") == kExitUsage);
  CHECK(run_tool("run-gate --trials 10") == kExitUsage);
  CHECK(run_tool("teleport --seed 1") == kExitUsage);
  CHECK(run_tool("run-gate --seed 1 --bogus") == kExitUsage);
  CHECK(run_tool("run-gate --seed 1 --format xml") == kExitUsage);
  CHECK(run_tool("bounds --seed 1 --connect 127.0.0.1:9") == kExitUsage);
  CHECK(run_tool("--version") == kExitOk);
  fs::remove_all(dir);
}
