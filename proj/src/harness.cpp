#include "rdslab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rdslab/error.hpp"
#include "rdslab/io.hpp"

namespace rdslab {

using nlohmann::json;

namespace {

const std::map<std::string, std::vector<std::string>, std::less<>>& suites() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> s = {
      {"quasi-uniform", {"mass-dissipation-smoke", "mass-dissipation", "equal-diffusion"}},
      {"large-diffusion", {"gronwall-ceiling", "diffusion-sweep"}},
      {"small-data", {"small-data"}},
      {"averages-ode", {"averages-ode"}},
      {"gac", {"gac-cycle"}},
      {"boundary-equilibria", {"boundary-equilibria"}},
      {"close-to-equilibrium", {"close-to-equilibrium"}},
      {"lemmas", {"lemmas"}},
  };
  return s;
}

void write_snapshots(const Trajectory& traj, const SimConfig& cfg, const Scenario& sc,
                     const std::filesystem::path& dir) {
  if (!traj.has_fields()) return;
  for (std::size_t k = 0; k < sc.snapshots.size(); ++k) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < traj.samples.size(); ++j)
      if (std::abs(traj.samples[j].t - sc.snapshots[k]) < std::abs(traj.samples[best].t - sc.snapshots[k])) best = j;
    write_text(dir / ("fields_" + std::to_string(k) + ".csv"), field_csv(traj.fields[best], cfg.grid, traj.species));
  }
}

}  // namespace

ScenarioOutcome run_scenario(const Scenario& scenario, const RunOptions& options) {
  RunContext ctx(scenario, options.seed_override);
  ScenarioOutcome out;
  out.name = ctx.scenario().name;

  const Trajectory* traj = nullptr;
  try {
    traj = &ctx.trajectory();
  } catch (const NumericalError& e) {
    out.error = e.what();
    out.exit_code = kExitNumerical;
  }

  if (traj) {
    out.blowup = traj->blowup;
    for (const auto& id : ctx.scenario().checks) out.checks.push_back(run_check(*find_check(id), ctx));
    const bool all_pass = std::all_of(out.checks.begin(), out.checks.end(), [](const auto& c) { return c.pass; });
    if (traj->blowup && !ctx.scenario().expect_blowup) {
      out.exit_code = kExitNumerical;
    } else if (!all_pass) {
      out.exit_code = kExitCheckFailed;
    }
  }

  json checks = json::array();
  for (const auto& c : out.checks) checks.push_back(to_json(c));
  out.report = {{"scenario", out.name},
                {"pass", out.exit_code == kExitPass},
                {"exit_code", out.exit_code},
                {"blowup", out.blowup},
                {"checks", checks}};
  if (!out.error.empty()) out.report["error"] = out.error;

  if (options.out_dir) {
    const auto& dir = *options.out_dir;
    if (traj) {
      write_text(dir / "diagnostics.csv", diagnostics_csv(*traj));
      write_text(dir / "summary.json", summary_json(*traj, ctx.config(), ctx.scenario()).dump(2) + "\n");
      write_snapshots(*traj, ctx.config(), ctx.scenario(), dir);
    }
    write_text(dir / "report.json", out.report.dump(2) + "\n");
  }
  return out;
}

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : suites()) names.push_back(name);
  return names;
}

std::vector<std::string> suite_scenarios(std::string_view suite) {
  const auto it = suites().find(suite);
  if (it == suites().end()) {
    std::string known;
    for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown suite '" + std::string(suite) + "' (suites: " + known + ")");
  }
  return it->second;
}

SuiteOutcome run_suite(std::string_view suite, const RunOptions& options) {
  const auto names = suite_scenarios(suite);
  // Parse everything first so that config errors surface before any compute.
  std::vector<Scenario> scenarios;
  for (const auto& n : names) scenarios.push_back(builtin_scenario(n));
  for (const auto& sc : scenarios) RunContext(sc, options.seed_override);

  SuiteOutcome out;
  out.name = std::string(suite);
  json reports = json::array();
  json flat = json::array();
  for (const auto& sc : scenarios) {
    RunOptions sub = options;
    if (options.out_dir) sub.out_dir = *options.out_dir / sc.name;
    ScenarioOutcome r = run_scenario(sc, sub);
    if (r.exit_code == kExitNumerical) {
      out.exit_code = kExitNumerical;
    } else if (r.exit_code != kExitPass && out.exit_code == kExitPass) {
      out.exit_code = r.exit_code;
    }
    for (const auto& c : r.report["checks"]) {
      json entry = c;
      entry["scenario"] = sc.name;
      flat.push_back(entry);
    }
    reports.push_back(r.report);
    out.scenarios.push_back(std::move(r));
  }
  out.report = {{"suite", out.name},
                {"pass", out.exit_code == kExitPass},
                {"exit_code", out.exit_code},
                {"checks", flat},
                {"scenarios", reports}};
  if (options.out_dir) write_text(*options.out_dir / "report.json", out.report.dump(2) + "\n");
  return out;
}

SweepTable run_sweep(const Scenario& scenario, std::span<const double> factors, const RunOptions& options) {
  const SimConfig probe = make_sim_config(scenario);
  const SweepTable table = sweep_diffusion(scenario, factors, 0.0, probe.t_end, options.seed_override);
  if (options.out_dir) {
    write_text(*options.out_dir / "sweep.csv", sweep_csv(table));
    json j = to_json(table);
    j["scenario"] = scenario.name;
    j["base_diffusion"] = scenario.diffusion;
    write_text(*options.out_dir / "sweep.json", j.dump(2) + "\n");
  }
  return table;
}

}  // namespace rdslab
