// Command-line driver: one subcommand per experiment suite.
//
// Every config key is also a flag (--sigma, --metric.kind, ...). Values are
// layered defaults < --config file < flags given on the command line.
// Exit status: 0 all checks pass, 1 some check failed, 2 configuration or
// module error.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "fracwkb/error.hpp"
#include "fracwkb/suite.hpp"

namespace {

// Short spellings used in the docs.
const std::map<std::string, std::string> kAliases{
    {"metric.kind", "--metric"},
    {"output.dir", "--out"},
};

const char* describe(const std::string& suite) {
  if (suite == "phase") return "Hamilton-Jacobi phase table, exactness and residual checks";
  if (suite == "kernel") return "FIO kernel at one time: stationary phase, Hessian, remainder";
  if (suite == "dispersive") return "kernel sup-norm decay against t / h";
  if (suite == "strichartz") return "Strichartz norm-ratio scaling sweeps in h";
  if (suite == "nlfs") return "nonlinear fractional Schrodinger solve with conservation, Picard and continuation";
  if (suite == "nlfw") return "nonlinear fractional wave solve";
  return "structural audit: metric, flow bounds, Littlewood-Paley, admissibility";
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical toolkit for fractional Schrodinger groups"};
  app.require_subcommand(1);
  // Keep -h free: --h is the semiclassical parameter.
  app.set_help_flag("--help", "Print this help message and exit");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "print only the check lines");
  app.fallthrough();

  std::map<std::string, Subcommand> subs;
  for (const auto& suite : fracwkb::suite_names()) {
    auto& s = subs[suite];
    s.app = app.add_subcommand(suite, describe(suite));
    s.app->add_option("--config", s.config_file, "key = value file")->check(CLI::ExistingFile);
    for (const auto& key : fracwkb::suite_keys(suite)) {
      std::string names = "--" + key.name;
      const auto alias = kAliases.find(key.name);
      if (alias != kAliases.end()) names += "," + alias->second;
      s.options[key.name] =
          s.app->add_option(names, s.values[key.name], key.help + " [default " + key.default_value + "]");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  for (auto& [suite, s] : subs) {
    if (!s.app->parsed()) continue;
    try {
      fracwkb::Config overrides;
      if (!s.config_file.empty()) overrides = fracwkb::Config::load(s.config_file);
      for (const auto& [key, opt] : s.options)
        if (opt->count() > 0) overrides.set(key, s.values[key]);
      const auto cfg = fracwkb::resolve_config(suite, overrides);

      const auto start = std::chrono::steady_clock::now();
      const auto report = fracwkb::run_suite(suite, cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const auto written = fracwkb::write_outputs(report, cfg.text("output.dir"));

      if (quiet) {
        for (const auto& r : report.rows)
          std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.check << ": " << r.measured << "\n";
      } else {
        std::cout << report.text();
        for (const auto& path : written) std::cout << "wrote " << path << "\n";
        std::printf("elapsed %.2f s\n", secs);
      }
      return report.passed() ? 0 : 1;
    } catch (const fracwkb::Error& e) {
      std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
      return 2;
    }
  }
  return 2;
}
