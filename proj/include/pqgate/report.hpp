#ifndef PQGATE_REPORT_HPP
#define PQGATE_REPORT_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace pqgate::cli {

using Json = nlohmann::ordered_json;

struct Check {
  std::string name;
  bool passed = false;
  Json measured;
};

/// One experiment's output: `config`, tabular `results`, named `checks`, and
/// optional extra sections keyed by name.
struct Report {
  std::string command;
  Json config = Json::object();
  Json results = Json::array();
  std::vector<Check> checks;
  Json sections = Json::object();

  void check(std::string name, bool passed, Json measured) {
    checks.push_back({std::move(name), passed, std::move(measured)});
  }
  bool all_passed() const;
  Json to_json() const;
  // The `results` rows flattened to CSV; columns follow the first row.
  std::string to_csv() const;
};

std::string version_string();

}  // namespace pqgate::cli

#endif  // PQGATE_REPORT_HPP
