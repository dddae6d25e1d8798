#pragma once

// Named checks run against a scenario. Each check reads the scenario's
// trajectory (simulated once, on first use) and/or performs its own auxiliary
// runs, and returns a verdict with every evaluated inequality.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rdslab/analysis.hpp"
#include "rdslab/scenario.hpp"
#include "rdslab/solver.hpp"

namespace rdslab {

struct CheckResult {
  std::string id;
  bool pass = false;
  std::string summary;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<InequalityInstance> instances;
  double seconds = 0.0;
};

class RunContext {
 public:
  // Builds the simulation config (ConfigError before any compute).
  explicit RunContext(Scenario scenario, std::optional<std::uint64_t> seed_override = std::nullopt);

  const Scenario& scenario() const noexcept { return scenario_; }
  const SimConfig& config() const noexcept { return config_; }
  const Nonlinearity& nonlinearity() const noexcept { return config_.nonlinearity; }
  const SpatialGrid& grid() const noexcept { return config_.grid; }

  // Simulates on first use.
  const Trajectory& trajectory();
  bool simulated() const noexcept { return trajectory_.has_value(); }

  std::uint64_t seed(std::uint64_t fallback) const { return seed_override_.value_or(fallback); }

  double param(std::string_view check, std::string_view key, double fallback) const;
  std::vector<double> param_list(std::string_view check, std::string_view key, std::vector<double> fallback) const;

 private:
  Scenario scenario_;
  SimConfig config_;
  std::optional<std::uint64_t> seed_override_;
  std::optional<Trajectory> trajectory_;
};

using CheckFunction = std::function<CheckResult(RunContext&)>;

struct CheckSpec {
  std::string id;
  std::string description;
  std::vector<std::string> params;
  bool needs_fields = false;
  CheckFunction run;
};

const std::vector<CheckSpec>& check_registry();
const CheckSpec* find_check(std::string_view id);

// Runs one check, turning library errors into a failed verdict.
CheckResult run_check(const CheckSpec& spec, RunContext& context);

struct SweepRow {
  double factor = 1.0;
  bool global = true;
  double sup_linf = 0.0;            // sup over samples of max_i |u_i|_inf
  std::optional<DecayFit> fit;      // of sum_i |u_i - avg u_i|_inf
  std::string note;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  bool rate_increasing = true;      // fitted rates strictly increase along the rows
};

inline constexpr double kSweepPlateau = 1e-10;

// Reruns the scenario with d multiplied by each factor. Blow-up rows are
// recorded as non-global and excluded from the trend. Each fit window ends
// where the deviation first drops below kSweepPlateau times its initial value.
SweepTable sweep_diffusion(const Scenario& base, std::span<const double> factors, double t_lo, double t_hi,
                           std::optional<std::uint64_t> seed_override = std::nullopt);

// Empirical C_{d,p} provider backed by estimate_regularity_constant on grid.
RegularityProvider empirical_regularity(const SpatialGrid& grid, std::size_t sources, double horizon, double dt,
                                        std::uint64_t seed);

}  // namespace rdslab
