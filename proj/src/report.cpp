#include "pqgate/report.hpp"

#include <sstream>

#ifndef PQGATE_VERSION
#define PQGATE_VERSION "0.0.0"
#endif

namespace pqgate::cli {

std::string version_string() { return std::string("pqgate ") + PQGATE_VERSION; }

bool Report::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

Json Report::to_json() const {
  Json out;
  out["tool"] = "pqgate";
  out["version"] = version_string();
  out["command"] = command;
  out["config"] = config;
  out["results"] = results;
  Json checks_json = Json::array();
  for (const auto& c : checks)
    checks_json.push_back({{"name", c.name}, {"passed", c.passed}, {"measured", c.measured}});
  out["checks"] = checks_json;
  for (const auto& [key, value] : sections.items()) out[key] = value;
  out["all_passed"] = all_passed();
  return out;
}

namespace {

std::string csv_cell(const Json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    return quoted + "\"";
  }
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

std::string Report::to_csv() const {
  std::ostringstream out;
  if (results.empty()) return {};
  std::vector<std::string> columns;
  for (const auto& [key, _] : results.front().items()) columns.push_back(key);
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : results) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out << (i ? "," : "");
      if (row.contains(columns[i])) out << csv_cell(row[columns[i]]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pqgate::cli
