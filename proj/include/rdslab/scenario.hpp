#pragma once

// Scenario files: INI with typed sections.
//
//   [scenario]    name
//   [network]     dsl = A + B -> C @ 1 | C -> A @ 0.5   (lines separated by '|')
//                 file = path/to/net.crn | builtin = remark-1-4
//   [grid]        lengths = 1 [1], counts = 64 [64]
//   [diffusion]   d = 1 2 3, factors = 1 8             (factors: sweep schedule)
//   [initial]     type = constant | bump | random, plus
//                 values | base, amplitude, center, width, zero_mean | lo, hi, seed
//   [time]        dt, t_end, stride
//   [checks]      run = check-a, check-b
//   [<check-id>]  parameters of that check
//   [equilibrium] method = cbe | single-reversible | given, value
//   [options]     truncation_radius, rescale, z0, expect_blowup
//   [output]      snapshots = t1 t2 ...
//
// Bump centers are points separated by ',' with coordinates separated by
// spaces; one point is shared by all species.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdslab/grid.hpp"
#include "rdslab/network.hpp"
#include "rdslab/solver.hpp"

namespace rdslab {

struct NetworkSource {
  enum class Kind { Inline, File, Builtin };
  Kind kind = Kind::Inline;
  std::string value;
};

enum class EquilibriumMethod { ComplexBalanced, SingleReversible, Given };

struct EquilibriumRequest {
  EquilibriumMethod method = EquilibriumMethod::ComplexBalanced;
  std::vector<double> value;  // Given only
};

using CheckParams = std::map<std::string, std::string>;

struct Scenario {
  std::string name;
  NetworkSource network;
  std::vector<double> lengths;
  std::vector<std::size_t> counts;
  std::vector<double> diffusion;
  std::vector<double> sweep_factors;
  InitialData initial = ConstantInit{};
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t stride = 1;
  std::vector<std::string> checks;
  std::map<std::string, CheckParams> params;  // keyed by check id
  std::optional<EquilibriumRequest> equilibrium;
  std::optional<double> truncation_radius;
  bool rescale = false;
  std::vector<double> z0;
  bool expect_blowup = false;
  std::vector<double> snapshots;
  std::filesystem::path base_dir;  // resolves relative network files

  const CheckParams& check_params(std::string_view check) const;
};

// Throws ConfigError (unknown sections or keys, malformed values, unknown
// checks, missing seeds for random data).
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

std::vector<std::string> builtin_scenario_names();
std::string_view builtin_scenario_text(std::string_view name);  // ConfigError if unknown
Scenario builtin_scenario(std::string_view name);

// An existing file path, otherwise a builtin name.
Scenario resolve_scenario(std::string_view file_or_builtin);

Nonlinearity make_nonlinearity(const Scenario& scenario);
SpatialGrid make_grid(const Scenario& scenario);

// Builds and validates the simulation config; resolves a requested
// equilibrium from the averages of the initial data.
SimConfig make_sim_config(const Scenario& scenario);

// Replaces the seed of random initial data.
void apply_seed_override(Scenario& scenario, std::uint64_t seed);

// Comma- or whitespace-separated reals. Throws ConfigError naming the key.
std::vector<double> parse_real_list(std::string_view text, std::string_view key);

}  // namespace rdslab
