#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fracwkb {

/// Flat key = value configuration. Blank lines and text after '#' are ignored.
class Config {
 public:
  /// Throws ConfigError on malformed lines or repeated keys.
  static Config parse(const std::string& text, const std::string& source = "<string>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  void merge(const Config& other);
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  /// Typed access; a missing key or an unparsable value throws ConfigError.
  const std::string& text(const std::string& key) const;
  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

const std::vector<std::string>& suite_names();

/// Keys a suite accepts, with defaults. Throws ConfigError for an unknown suite.
const std::vector<ConfigKey>& suite_keys(const std::string& suite);

/// Suite defaults overlaid with `overrides`. Unknown keys and out-of-range
/// values are rejected here, before anything is computed.
Config resolve_config(const std::string& suite, const Config& overrides);

struct ReportRow {
  std::string check;
  std::string measured;
  std::string target;
  bool pass = false;
};

/// Numeric CSV table, written as <name>.csv.
struct CsvTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct SuiteReport {
  std::string suite;
  Config config;
  std::vector<std::pair<std::string, std::string>> facts;
  std::vector<ReportRow> rows;
  std::vector<CsvTable> tables;

  bool passed() const;
  std::string text() const;
};

/// Runs a suite on a resolved configuration. Setup failures propagate as the
/// module's error; a failing check becomes a FAIL row carrying the message.
SuiteReport run_suite(const std::string& suite, const Config& resolved);

std::string to_csv(const CsvTable& table);

/// Writes every table and <suite>_report.txt into `dir` (created if needed).
/// Returns the paths written.
std::vector<std::string> write_outputs(const SuiteReport& report, const std::string& dir);

}  // namespace fracwkb
