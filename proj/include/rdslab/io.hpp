#pragma once

// Artifact formats: diagnostics.csv, fields_<k>.csv, summary.json, report.json.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rdslab/checks.hpp"
#include "rdslab/scenario.hpp"
#include "rdslab/solver.hpp"

namespace rdslab {

// Shortest representation that parses back to the same double.
std::string format_real(double x);

// t, then per species L1, L2, Linf, avg, then total_mass, [entropy], sum_linf,
// dev_linf, dev_l2sq, shifted_linf, [lyapunov].
std::string diagnostics_csv(const Trajectory& trajectory);

// One row per node: x[, y], then one column per species. Metadata lines
// start with '#'.
std::string field_csv(const FieldState& state, const SpatialGrid& grid, const std::vector<std::string>& species);

nlohmann::json scenario_json(const Scenario& scenario);
nlohmann::json summary_json(const Trajectory& trajectory, const SimConfig& config, const Scenario& scenario);
nlohmann::json to_json(const InequalityInstance& instance);
nlohmann::json to_json(const CheckResult& result);
nlohmann::json to_json(const SweepTable& table);
std::string sweep_csv(const SweepTable& table);

// Creates parent directories. Throws Error on I/O failure.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace rdslab
