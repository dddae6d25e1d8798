#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdslab/equilibria.hpp"
#include "rdslab/error.hpp"
#include "rdslab/harness.hpp"
#include "rdslab/io.hpp"
#include "rdslab/kernels.hpp"
#include "rdslab/network.hpp"

namespace {

using namespace rdslab;

void print_checks(const ScenarioOutcome& r) {
  std::printf("scenario %s\n", r.name.c_str());
  if (!r.error.empty()) std::printf("  ERROR %s\n", r.error.c_str());
  for (const auto& c : r.checks)
    std::printf("  %-4s %-26s %7.2fs  %s\n", c.pass ? "PASS" : "FAIL", c.id.c_str(), c.seconds, c.summary.c_str());
  std::printf("  exit %d\n", r.exit_code);
}

int check_network(const std::string& path, const std::optional<std::string>& out) {
  const ReactionNetwork net = load_network(path);
  const Nonlinearity f = Nonlinearity::mass_action(net);
  nlohmann::json j;
  j["species"] = net.species();
  j["reactions"] = net.reaction_count();
  j["normalized"] = format_network(net);
  j["dissipation"] = std::string(to_string(classify_dissipation(net)));
  j["growth_exponent"] = growth_exponent(net);
  const auto qp = check_quasi_positivity(f, 1000, 10.0);
  j["quasi_positive"] = qp.pass;
  j["quasi_positivity_structural"] = qp.structural;
  const Eigen::MatrixXd w = conservation_laws(net);
  nlohmann::json laws = nlohmann::json::array();
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    std::vector<double> row(w.cols());
    for (Eigen::Index c = 0; c < w.cols(); ++c) row[c] = w(r, c);
    laws.push_back(row);
  }
  j["conservation_laws"] = laws;
  j["single_reversible_pair"] = is_single_reversible_pair(net);
  auto ref = find_complex_balanced_reference(net);
  if (!ref) ref = kirchhoff_reference(net);
  if (ref) {
    j["complex_balanced_reference"] = *ref;
  } else {
    j["complex_balanced_reference"] = nullptr;
  }

  std::printf("species      %zu:", net.species_count());
  for (const auto& s : net.species()) std::printf(" %s", s.c_str());
  std::printf("\nreactions    %zu\n%s", net.reaction_count(), format_network(net).c_str());
  std::printf("dissipation  %s\n", j["dissipation"].get<std::string>().c_str());
  std::printf("mu           %s\n", format_real(growth_exponent(net)).c_str());
  std::printf("quasi-pos.   %s\n", qp.pass ? "yes" : "no");
  std::printf("conserved    %lld\n", static_cast<long long>(w.rows()));
  std::printf("cb reference %s\n", j["complex_balanced_reference"].is_null() ? "none"
                                                                               : j["complex_balanced_reference"].dump().c_str());
  if (out) write_text(std::filesystem::path(*out) / "network.json", j.dump(2) + "\n");
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rdslab: reaction-diffusion experiments on mass-action networks"};
  app.require_subcommand(1);
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::string kernels = "";
  app.add_option("--out", out, "artifact directory");
  app.add_option("--seed-override", seed, "replace every configured seed");
  app.add_option("--kernels", kernels, "kernel variant: auto, scalar, avx2");

  std::string target;
  auto* run = app.add_subcommand("run", "run a scenario file or builtin scenario");
  run->add_option("scenario", target, "scenario file or builtin name")->required();

  std::string suite;
  auto* suite_cmd = app.add_subcommand("suite", "run a named suite");
  suite_cmd->add_option("name", suite, "suite name")->required();

  std::vector<double> factors;
  auto* sweep = app.add_subcommand("sweep", "rerun a scenario with scaled diffusion");
  sweep->add_option("scenario", target, "scenario file or builtin name")->required();
  sweep->add_option("--factors", factors, "diffusion multipliers")->expected(0, -1);

  std::string crn;
  auto* check = app.add_subcommand("check-network", "structural report for a .crn file");
  check->add_option("file", crn, "reaction network file")->required();

  auto* list = app.add_subcommand("list", "list builtin scenarios, suites and checks");

  for (auto* sub : {run, suite_cmd, sweep, check}) {
    sub->add_option("--out", out, "artifact directory");
    sub->add_option("--seed-override", seed, "replace every configured seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (!kernels.empty() && kernels != "auto" && !kernels::select(kernels))
      throw ConfigError("kernel variant '" + kernels + "' is not available");
    RunOptions opts;
    if (out) opts.out_dir = *out;
    opts.seed_override = seed;

    if (*run) {
      const ScenarioOutcome r = run_scenario(resolve_scenario(target), opts);
      print_checks(r);
      return r.exit_code;
    }
    if (*suite_cmd) {
      const SuiteOutcome r = run_suite(suite, opts);
      for (const auto& s : r.scenarios) print_checks(s);
      std::printf("suite %s: exit %d\n", r.name.c_str(), r.exit_code);
      return r.exit_code;
    }
    if (*sweep) {
      Scenario sc = resolve_scenario(target);
      if (!sweep->count("--factors")) factors = sc.sweep_factors;
      const SweepTable t = run_sweep(sc, factors, opts);
      std::printf("%s", sweep_csv(t).c_str());
      std::printf("rate increasing: %s\n", t.rate_increasing ? "yes" : "no");
      return kExitPass;
    }
    if (*check) return check_network(crn, out);
    if (*list) {
      std::printf("scenarios:\n");
      for (const auto& n : builtin_scenario_names()) std::printf("  %s\n", n.c_str());
      std::printf("suites:\n");
      for (const auto& n : suite_names()) {
        std::printf("  %-22s", n.c_str());
        for (const auto& s : suite_scenarios(n)) std::printf(" %s", s.c_str());
        std::printf("\n");
      }
      std::printf("checks:\n");
      for (const auto& c : check_registry()) std::printf("  %-26s %s\n", c.id.c_str(), c.description.c_str());
      std::printf("kernels: %s\n", std::string(kernels::active().name).c_str());
      return kExitPass;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitPass;
}
