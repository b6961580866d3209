#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "floquet/scenario.hpp"

namespace {

// Exit codes: 0 all checks pass, 1 numerical-tolerance failure,
// 2 validation, 3 resonance/branch-boundary, 4 level crossing.
enum ExitCode {
  kOk = 0,
  kToleranceFailure = 1,
  kValidation = 2,
  kBranchBoundary = 3,
  kLevelCrossing = 4,
};

int classify(const std::exception& e) {
  if (dynamic_cast<const floquet::BranchBoundaryError*>(&e)) {
    return kBranchBoundary;
  }
  if (dynamic_cast<const floquet::LevelCrossingError*>(&e)) {
    return kLevelCrossing;
  }
  if (dynamic_cast<const floquet::ValidationError*>(&e)) return kValidation;
  if (dynamic_cast<const floquet::ToleranceError*>(&e)) {
    return kToleranceFailure;
  }
  return kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Floquet decompositions, periodic dynamical invariants, and "
      "non-Abelian geometric phases for driven finite-dimensional systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int steps = 0;
  int order = 0;
  std::string gauge;
  std::string format;

  CLI::App* run = app.add_subcommand(
      "run", "Run a scenario and write its machine-readable report");
  run->add_option("--config", config_path,
                  "Scenario config JSON (default: built-in spin1-precessing)");
  run->add_option("--out", out_dir, "Output directory for report and traces");
  run->add_option("--steps", steps, "Override grid steps (even power of two)");
  run->add_option("--order", order, "Override integrator order (2 or 4)")
      ->check(CLI::IsMember({2, 4}));
  run->add_option("--gauge", gauge, "Restrict to one gauge")
      ->check(CLI::IsMember({"floquet", "aligned"}));
  run->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "both"}));

  int check_steps = 512;
  CLI::App* check = app.add_subcommand(
      "check", "Run the acceptance self-check and print the criteria table");
  check->add_option("--steps", check_steps,
                    "Grid steps for the scenario-based criteria");
  bool check_json = false;
  check->add_flag("--json", check_json, "Emit the report as JSON instead");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      floquet::ScenarioConfig config = floquet::default_scenario();
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
          std::cerr << "error: cannot read config " << config_path << "\n";
          return kValidation;
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        config = floquet::ScenarioConfig::from_json(buffer.str());
      }
      if (!out_dir.empty()) config.output.directory = out_dir;
      if (steps > 0) config.steps = steps;
      if (order == 2) config.method = floquet::StepMethod::magnus2;
      if (order == 4) config.method = floquet::StepMethod::magnus4;
      if (!gauge.empty()) config.gauges = {floquet::gauge_from_string(gauge)};
      if (!format.empty()) config.output.format = format;

      const floquet::Report report = floquet::run_scenario(config);
      if (config.output.directory.empty()) {
        std::cout << report.to_json() << "\n";
      } else {
        std::cout << "report written to "
                  << (std::filesystem::path(config.output.directory) /
                      "report.json")
                         .string()
                  << "\n";
      }
      if (!report.passed()) {
        for (const auto& f : report.tolerance_failures) {
          std::cerr << "tolerance failure: " << f << "\n";
        }
        return kToleranceFailure;
      }
      return kOk;
    }

    // check
    const floquet::Report report =
        floquet::self_check({.steps = check_steps});
    if (check_json) {
      std::cout << report.to_json() << "\n";
    } else {
      std::cout << floquet::format_criteria(report);
    }
    for (const auto& c : report.criteria) {
      if (!c.pass) return kToleranceFailure;
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  }
}
