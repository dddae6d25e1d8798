#include "rdslab/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rdslab/checks.hpp"
#include "rdslab/equilibria.hpp"
#include "rdslab/error.hpp"

namespace rdslab {

namespace detail {
// Generated from scenarios/*.ini at configure time.
extern const std::vector<std::pair<std::string_view, std::string_view>> kBuiltinScenarios;
}  // namespace detail

namespace {

namespace pt = boost::property_tree;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double parse_real(std::string_view text, std::string_view key) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a number");
  return v;
}

std::uint64_t parse_unsigned(std::string_view text, std::string_view key) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a nonnegative integer");
  return v;
}

bool parse_bool(std::string_view text, std::string_view key) {
  text = trim(text);
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a boolean");
}

using Section = std::map<std::string, std::string>;

Section read_section(const pt::ptree& node, const std::string& name, std::initializer_list<std::string_view> allowed) {
  Section out;
  for (const auto& [key, value] : node) {
    if (!value.empty()) throw ConfigError("[" + name + "] " + key + ": nested keys are not supported");
    if (allowed.size() && std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("[" + name + "]: unknown key '" + key + "'");
    out[key] = value.data();
  }
  return out;
}

const std::string* find(const Section& s, const std::string& key) {
  const auto it = s.find(key);
  return it == s.end() ? nullptr : &it->second;
}

const std::string& require(const Section& s, const std::string& section, const std::string& key) {
  if (const auto* v = find(s, key)) return *v;
  throw ConfigError("[" + section + "]: missing key '" + key + "'");
}

std::vector<std::array<double, 2>> parse_centers(std::string_view text) {
  std::vector<std::array<double, 2>> out;
  for (std::string_view point : split(text, ',')) {
    std::vector<double> xy;
    std::istringstream in{std::string(point)};
    std::string tok;
    while (in >> tok) xy.push_back(parse_real(tok, "initial.center"));
    if (xy.empty() || xy.size() > 2) throw ConfigError("initial.center: each point needs one or two coordinates");
    out.push_back({xy[0], xy.size() == 2 ? xy[1] : 0.5});
  }
  return out;
}

InitialData parse_initial(const Section& s) {
  const std::string& type = require(s, "initial", "type");
  auto only = [&](std::initializer_list<std::string_view> keys) {
    for (const auto& [key, _] : s)
      if (key != "type" && std::find(keys.begin(), keys.end(), key) == keys.end())
        throw ConfigError("[initial]: key '" + key + "' does not apply to type " + type);
  };
  if (type == "constant") {
    only({"values"});
    return ConstantInit{parse_real_list(require(s, "initial", "values"), "initial.values")};
  }
  if (type == "bump") {
    only({"base", "amplitude", "center", "width", "zero_mean"});
    BumpInit b;
    b.base = parse_real_list(require(s, "initial", "base"), "initial.base");
    b.amplitude = parse_real_list(require(s, "initial", "amplitude"), "initial.amplitude");
    b.centers = parse_centers(require(s, "initial", "center"));
    if (const auto* w = find(s, "width")) b.width = parse_real(*w, "initial.width");
    if (const auto* z = find(s, "zero_mean")) b.zero_mean = parse_bool(*z, "initial.zero_mean");
    return b;
  }
  if (type == "random") {
    only({"lo", "hi", "seed"});
    const auto* seed = find(s, "seed");
    if (!seed) throw ConfigError("[initial]: random initial data needs an explicit seed");
    RandomInit r;
    r.lo = parse_real(require(s, "initial", "lo"), "initial.lo");
    r.hi = parse_real(require(s, "initial", "hi"), "initial.hi");
    r.seed = parse_unsigned(*seed, "initial.seed");
    return r;
  }
  throw ConfigError("[initial]: unknown type '" + type + "' (constant, bump, random)");
}

}  // namespace

std::vector<double> parse_real_list(std::string_view text, std::string_view key) {
  std::string normalized(text);
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_real(tok, key));
  return out;
}

const CheckParams& Scenario::check_params(std::string_view check) const {
  static const CheckParams empty;
  const auto it = params.find(std::string(check));
  return it == params.end() ? empty : it->second;
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("scenario: " + std::string(e.what()));
  }

  Scenario sc;
  sc.base_dir = base_dir;
  std::set<std::string> seen;
  std::map<std::string, const pt::ptree*> check_sections;
  for (const auto& [name, node] : tree) {
    if (node.empty() && !node.data().empty()) throw ConfigError("scenario: key '" + name + "' outside a section");
    seen.insert(name);
    if (name == "scenario") {
      sc.name = read_section(node, name, {"name"}).at("name");
    } else if (name == "network") {
      const Section s = read_section(node, name, {"dsl", "file", "builtin"});
      if (s.size() != 1) throw ConfigError("[network]: give exactly one of dsl, file, builtin");
      const auto& [key, value] = *s.begin();
      sc.network.kind = key == "dsl" ? NetworkSource::Kind::Inline
                        : key == "file" ? NetworkSource::Kind::File
                                        : NetworkSource::Kind::Builtin;
      sc.network.value = value;
    } else if (name == "grid") {
      const Section s = read_section(node, name, {"lengths", "counts"});
      sc.lengths = parse_real_list(require(s, name, "lengths"), "grid.lengths");
      for (double c : parse_real_list(require(s, name, "counts"), "grid.counts")) {
        if (c < 0 || c != static_cast<double>(static_cast<std::size_t>(c)))
          throw ConfigError("grid.counts: node counts must be nonnegative integers");
        sc.counts.push_back(static_cast<std::size_t>(c));
      }
    } else if (name == "diffusion") {
      const Section s = read_section(node, name, {"d", "factors"});
      sc.diffusion = parse_real_list(require(s, name, "d"), "diffusion.d");
      if (const auto* f = find(s, "factors")) sc.sweep_factors = parse_real_list(*f, "diffusion.factors");
    } else if (name == "initial") {
      sc.initial = parse_initial(read_section(node, name, {}));
    } else if (name == "time") {
      const Section s = read_section(node, name, {"dt", "t_end", "stride"});
      if (const auto* v = find(s, "dt")) sc.dt = parse_real(*v, "time.dt");
      if (const auto* v = find(s, "t_end")) sc.t_end = parse_real(*v, "time.t_end");
      if (const auto* v = find(s, "stride")) sc.stride = parse_unsigned(*v, "time.stride");
    } else if (name == "checks") {
      const Section s = read_section(node, name, {"run"});
      if (const auto* v = find(s, "run"))
        for (std::string_view id : split(*v, ','))
          if (!id.empty()) sc.checks.emplace_back(id);
    } else if (name == "equilibrium") {
      const Section s = read_section(node, name, {"method", "value"});
      EquilibriumRequest req;
      const std::string& method = require(s, name, "method");
      if (method == "cbe") {
        req.method = EquilibriumMethod::ComplexBalanced;
      } else if (method == "single-reversible") {
        req.method = EquilibriumMethod::SingleReversible;
      } else if (method == "given") {
        req.method = EquilibriumMethod::Given;
        req.value = parse_real_list(require(s, name, "value"), "equilibrium.value");
      } else {
        throw ConfigError("[equilibrium]: unknown method '" + method + "' (cbe, single-reversible, given)");
      }
      if (req.method != EquilibriumMethod::Given && find(s, "value"))
        throw ConfigError("[equilibrium]: value applies to method = given only");
      sc.equilibrium = req;
    } else if (name == "options") {
      const Section s = read_section(node, name, {"truncation_radius", "rescale", "z0", "expect_blowup"});
      if (const auto* v = find(s, "truncation_radius")) sc.truncation_radius = parse_real(*v, "options.truncation_radius");
      if (const auto* v = find(s, "rescale")) sc.rescale = parse_bool(*v, "options.rescale");
      if (const auto* v = find(s, "z0")) sc.z0 = parse_real_list(*v, "options.z0");
      if (const auto* v = find(s, "expect_blowup")) sc.expect_blowup = parse_bool(*v, "options.expect_blowup");
    } else if (name == "output") {
      const Section s = read_section(node, name, {"snapshots"});
      if (const auto* v = find(s, "snapshots")) sc.snapshots = parse_real_list(*v, "output.snapshots");
    } else {
      check_sections[name] = &node;
    }
  }

  for (const char* required : {"scenario", "network", "grid", "diffusion", "initial"})
    if (!seen.count(required)) throw ConfigError("scenario: missing section [" + std::string(required) + "]");
  if (sc.name.empty()) throw ConfigError("[scenario]: name must not be empty");

  for (const std::string& id : sc.checks) {
    if (!find_check(id)) {
      std::string known;
      for (const auto& c : check_registry()) known += (known.empty() ? "" : ", ") + c.id;
      throw ConfigError("unknown check '" + id + "' (known: " + known + ")");
    }
  }
  for (const auto& [name, node] : check_sections) {
    const CheckSpec* spec = find_check(name);
    if (!spec) throw ConfigError("scenario: unknown section [" + name + "]");
    if (std::find(sc.checks.begin(), sc.checks.end(), name) == sc.checks.end())
      throw ConfigError("scenario: parameters given for check '" + name + "' which is not run");
    CheckParams params;
    for (const auto& [key, value] : *node) {
      if (std::find(spec->params.begin(), spec->params.end(), key) == spec->params.end())
        throw ConfigError("[" + name + "]: unknown parameter '" + key + "'");
      params[key] = value.data();
    }
    sc.params[name] = std::move(params);
  }
  if (sc.dt <= 0.0) throw ConfigError("time.dt must be positive");
  if (sc.t_end < 0.0) throw ConfigError("time.t_end must be nonnegative");
  if (sc.stride < 1) throw ConfigError("time.stride must be at least 1");
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : detail::kBuiltinScenarios) names.emplace_back(name);
  std::sort(names.begin(), names.end());
  return names;
}

std::string_view builtin_scenario_text(std::string_view name) {
  for (const auto& [key, text] : detail::kBuiltinScenarios)
    if (key == name) return text;
  std::string known;
  for (const auto& n : builtin_scenario_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown scenario '" + std::string(name) + "' (builtin: " + known + ")");
}

Scenario builtin_scenario(std::string_view name) { return parse_scenario(builtin_scenario_text(name)); }

Scenario resolve_scenario(std::string_view file_or_builtin) {
  const std::filesystem::path p{std::string(file_or_builtin)};
  std::error_code ec;
  if (std::filesystem::is_regular_file(p, ec)) return load_scenario(p);
  return builtin_scenario(file_or_builtin);
}

Nonlinearity make_nonlinearity(const Scenario& sc) {
  try {
    switch (sc.network.kind) {
      case NetworkSource::Kind::Inline: {
        std::string text = sc.network.value;
        std::replace(text.begin(), text.end(), '|', '\n');
        return Nonlinearity::mass_action(parse_network(text));
      }
      case NetworkSource::Kind::File: {
        std::filesystem::path p = sc.network.value;
        if (p.is_relative() && !sc.base_dir.empty()) p = sc.base_dir / p;
        return Nonlinearity::mass_action(load_network(p));
      }
      case NetworkSource::Kind::Builtin:
        return Nonlinearity::builtin(sc.network.value);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("network: " + std::string(e.what()));
  }
  throw ConfigError("network: unknown source");
}

SpatialGrid make_grid(const Scenario& sc) {
  if (sc.lengths.size() != sc.counts.size())
    throw ConfigError("grid: lengths and counts need the same number of entries");
  try {
    return SpatialGrid(sc.lengths, sc.counts);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("grid: " + std::string(e.what()));
  }
}

SimConfig make_sim_config(const Scenario& sc) {
  SimConfig cfg(make_nonlinearity(sc), make_grid(sc), sc.diffusion, sc.initial);
  cfg.dt = sc.dt;
  cfg.t_end = sc.t_end;
  cfg.stride = sc.stride;
  cfg.truncation_radius = sc.truncation_radius;
  cfg.rescale = sc.rescale;
  cfg.z0 = sc.z0;
  cfg.validate();

  if (sc.equilibrium) {
    const std::size_t m = cfg.nonlinearity.species_count();
    if (sc.equilibrium->method == EquilibriumMethod::Given) {
      cfg.equilibrium = sc.equilibrium->value;
    } else {
      if (!cfg.nonlinearity.is_mass_action())
        throw ConfigError("[equilibrium]: computed equilibria need a mass-action network");
      const FieldState init = make_initial_state(cfg.initial, cfg.grid, m);
      std::vector<double> mean(m);
      for (std::size_t i = 0; i < m; ++i) mean[i] = spatial_average(init.species[i], cfg.grid);
      const auto& net = cfg.nonlinearity.network();
      try {
        if (sc.equilibrium->method == EquilibriumMethod::SingleReversible) {
          if (!is_single_reversible_pair(net))
            throw ConfigError("[equilibrium]: single-reversible needs exactly one reversible pair");
          cfg.equilibrium = solve_single_reversible_equilibrium(net, mean).u_inf;
        } else {
          cfg.equilibrium = solve_complex_balanced_equilibrium(net, mean).u_inf;
        }
      } catch (const NumericalError& e) {
        throw ConfigError("[equilibrium]: " + std::string(e.what()));
      }
    }
    cfg.validate();
  }
  return cfg;
}

void apply_seed_override(Scenario& sc, std::uint64_t seed) {
  if (auto* r = std::get_if<RandomInit>(&sc.initial)) r->seed = seed;
}

}  // namespace rdslab
