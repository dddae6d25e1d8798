#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "rdslab/checks.hpp"
#include "rdslab/error.hpp"
#include "rdslab/harness.hpp"
#include "rdslab/scenario.hpp"

using namespace rdslab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rdslab_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + RDSLAB_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kRandomScenario = R"(
[scenario]
name = random-decay
[network]
dsl = A + B -> C @ 1 | C -> A @ 0.5
[grid]
lengths = 1
counts = 16
[diffusion]
d = 1 2 3
[initial]
type = random
lo = 0
hi = 2
seed = 12
[time]
dt = 1e-3
t_end = 0.2
stride = 10
[checks]
run = mass-dissipation
)";

std::string smoke_with(const std::string& from, const std::string& to) {
  std::string text(builtin_scenario_text("mass-dissipation-smoke"));
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  return text;
}

}  // namespace

TEST_CASE("builtin smoke scenario passes with mass nonincreasing") {
  const auto dir = scratch("smoke");
  const auto r = run_scenario(builtin_scenario("mass-dissipation-smoke"), {dir, std::nullopt});
  CHECK(r.exit_code == kExitPass);
  REQUIRE(r.checks.size() == 1);
  CHECK(r.checks[0].id == "mass-dissipation");
  CHECK(r.checks[0].pass);
  for (const char* f : {"diagnostics.csv", "summary.json", "report.json"}) CHECK(fs::exists(dir / f));
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["pass"] == true);
  CHECK(report["checks"][0]["id"] == "mass-dissipation");
  fs::remove_all(dir);
}

TEST_CASE("scenario config errors") {
  CHECK_THROWS_AS(parse_scenario(smoke_with("run = mass-dissipation", "run = no-such-check")), ConfigError);
  CHECK_THROWS_AS(parse_scenario(smoke_with("[time]", "[bogus]\nx = 1\n[time]")), ConfigError);
  CHECK_THROWS_AS(parse_scenario(smoke_with("stride = 1", "stride = 1\nbogus = 2")), ConfigError);
  CHECK_THROWS_AS(make_sim_config(parse_scenario(smoke_with("d = 1 2 3", "d = 1 2"))), ConfigError);
  CHECK_THROWS_AS(parse_scenario(smoke_with("dt = 1e-3", "dt = abc")), ConfigError);
  std::string no_seed = kRandomScenario;
  no_seed.erase(no_seed.find("seed = 12"), 9);
  CHECK_THROWS_AS(parse_scenario(no_seed), ConfigError);
  CHECK_THROWS_AS(builtin_scenario("not-a-scenario"), ConfigError);
  CHECK_THROWS_AS(parse_real_list("1 x 3", "d"), ConfigError);
  CHECK(parse_real_list("1, 2.5 3", "d") == std::vector<double>{1, 2.5, 3});
}

TEST_CASE("cli exit codes") {
  const auto dir = scratch("cli");
  CHECK(cli("run mass-dissipation-smoke --out \"" + (dir / "ok").string() + "\"") == kExitPass);
  std::ofstream(dir / "bad.ini") << smoke_with("run = mass-dissipation", "run = no-such-check");
  CHECK(cli("run \"" + (dir / "bad.ini").string() + "\"") == kExitConfig);
  CHECK(cli("suite no-such-suite") == kExitConfig);
  CHECK(cli("check-network \"" + std::string(RDSLAB_SOURCE_DIR) + "/networks/cycle.crn\"") == kExitPass);
  std::ofstream(dir / "broken.crn") << "A -> B @ 1\nA -> @ 1\n";
  CHECK(cli("check-network \"" + (dir / "broken.crn").string() + "\"") == kExitConfig);
  CHECK(cli("list") == kExitPass);
  fs::remove_all(dir);
}

TEST_CASE("zero horizon emits only the initial diagnostics row") {
  const auto dir = scratch("t0");
  const auto sc = parse_scenario(smoke_with("t_end = 1", "t_end = 0"));
  const auto r = run_scenario(sc, {dir, std::nullopt});
  CHECK(r.exit_code == kExitPass);
  std::istringstream csv(slurp(dir / "diagnostics.csv"));
  std::string line;
  int rows = 0;
  std::string first;
  while (std::getline(csv, line))
    if (!line.empty()) {
      if (rows == 1) first = line;
      ++rows;
    }
  CHECK(rows == 2);
  CHECK(first.rfind("0,", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("identical scenario and seed give byte-identical diagnostics") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto sc = parse_scenario(kRandomScenario);
  run_scenario(sc, {a, std::nullopt});
  run_scenario(sc, {b, std::nullopt});
  const auto da = slurp(a / "diagnostics.csv");
  CHECK_FALSE(da.empty());
  CHECK(da == slurp(b / "diagnostics.csv"));

  // A different seed changes the data.
  const auto c = scratch("det_c");
  run_scenario(sc, {c, 99});
  CHECK(da != slurp(c / "diagnostics.csv"));
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("suites") {
  CHECK_THROWS_AS(suite_scenarios("no-such-suite"), ConfigError);
  try {
    suite_scenarios("no-such-suite");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("lemmas") != std::string::npos);
  }
  for (const auto& s : suite_names())
    for (const auto& n : suite_scenarios(s)) CHECK_NOTHROW(builtin_scenario(n));

  const auto dir = scratch("suite");
  const auto out = run_suite("quasi-uniform", {dir, std::nullopt});
  CHECK(out.exit_code == kExitPass);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  std::set<std::string> ids;
  for (const auto& c : report["checks"]) ids.insert(c["id"].get<std::string>());
  CHECK(ids.count("mass-dissipation") == 1);
  CHECK(ids.count("equal-diffusion-maxprin") == 1);
  for (const auto& id : ids) CHECK(find_check(id) != nullptr);
  CHECK(fs::exists(dir / "mass-dissipation-smoke" / "diagnostics.csv"));
  fs::remove_all(dir);
}

TEST_CASE("diffusion sweeps") {
  const auto sc = builtin_scenario("diffusion-sweep");
  const std::vector<double> none;
  CHECK(run_sweep(sc, none).rows.empty());
  const std::vector<double> factors{1.0, 8.0};
  const auto dir = scratch("sweep");
  const auto t = run_sweep(sc, factors, {dir, std::nullopt});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rate_increasing);
  CHECK(fs::exists(dir / "sweep.csv"));
  CHECK(fs::exists(dir / "sweep.json"));
  fs::remove_all(dir);
}

TEST_CASE("every check id in the registry is unique and documented") {
  std::set<std::string> seen;
  for (const auto& c : check_registry()) {
    CHECK(seen.insert(c.id).second);
    CHECK_FALSE(c.description.empty());
  }
  for (const auto& name : builtin_scenario_names()) {
    const auto sc = builtin_scenario(name);
    for (const auto& id : sc.checks) CHECK(find_check(id) != nullptr);
  }
}
