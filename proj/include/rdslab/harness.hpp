#pragma once

// Scenario runs, named suites and diffusion sweeps, with artifact emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rdslab/checks.hpp"
#include "rdslab/scenario.hpp"

namespace rdslab {

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitNumerical = 3 };

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // no artifacts when empty
  std::optional<std::uint64_t> seed_override;
};

struct ScenarioOutcome {
  std::string name;
  int exit_code = kExitPass;
  bool blowup = false;
  std::string error;  // numerical failure before any check ran
  std::vector<CheckResult> checks;
  nlohmann::json report;
};

// Throws ConfigError before any compute for invalid scenarios.
ScenarioOutcome run_scenario(const Scenario& scenario, const RunOptions& options = {});

struct SuiteOutcome {
  std::string name;
  int exit_code = kExitPass;
  std::vector<ScenarioOutcome> scenarios;
  nlohmann::json report;
};

std::vector<std::string> suite_names();
// Builtin scenario names run by a suite. ConfigError listing suites if unknown.
std::vector<std::string> suite_scenarios(std::string_view suite);
SuiteOutcome run_suite(std::string_view suite, const RunOptions& options = {});

// Writes sweep.csv and sweep.json under out_dir when given.
SweepTable run_sweep(const Scenario& scenario, std::span<const double> factors, const RunOptions& options = {});

}  // namespace rdslab
