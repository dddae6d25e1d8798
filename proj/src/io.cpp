#include "rdslab/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rdslab/error.hpp"

namespace rdslab {

using nlohmann::json;

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf.data(), ptr);
}

std::string diagnostics_csv(const Trajectory& traj) {
  std::ostringstream out;
  const bool entropy = !traj.samples.empty() && traj.samples.front().entropy.has_value();
  const bool lyapunov = !traj.samples.empty() && traj.samples.front().lyapunov.has_value();
  out << "t";
  for (const auto& s : traj.species) out << ",L1_" << s << ",L2_" << s << ",Linf_" << s << ",avg_" << s;
  out << ",total_mass";
  if (entropy) out << ",entropy";
  out << ",sum_linf,dev_linf,dev_l2sq,shifted_linf";
  if (lyapunov) out << ",lyapunov";
  out << "\n";
  for (const auto& d : traj.samples) {
    out << format_real(d.t);
    for (std::size_t i = 0; i < d.l1.size(); ++i)
      out << ',' << format_real(d.l1[i]) << ',' << format_real(d.l2[i]) << ',' << format_real(d.linf[i]) << ','
          << format_real(d.average[i]);
    out << ',' << format_real(d.total_mass);
    if (entropy) out << ',' << format_real(d.entropy.value_or(NAN));
    out << ',' << format_real(d.sum_linf) << ',' << format_real(d.deviation_linf) << ','
        << format_real(d.deviation_l2sq) << ',' << format_real(d.shifted_linf);
    if (lyapunov) out << ',' << format_real(d.lyapunov.value_or(NAN));
    out << "\n";
  }
  return out.str();
}

std::string field_csv(const FieldState& state, const SpatialGrid& grid, const std::vector<std::string>& species) {
  std::ostringstream out;
  out << "# t=" << format_real(state.time) << " dim=" << grid.dim() << " lengths=";
  for (std::size_t a = 0; a < grid.dim(); ++a) out << (a ? "x" : "") << format_real(grid.lengths()[a]);
  out << " counts=";
  for (std::size_t a = 0; a < grid.dim(); ++a) out << (a ? "x" : "") << grid.counts()[a];
  out << "\n" << (grid.dim() == 2 ? "x,y" : "x");
  for (const auto& s : species) out << ',' << s;
  out << "\n";
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const auto p = grid.position(n);
    out << format_real(p[0]);
    if (grid.dim() == 2) out << ',' << format_real(p[1]);
    for (const auto& f : state.species) out << ',' << format_real(f[n]);
    out << "\n";
  }
  return out.str();
}

json scenario_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["network"] = {{"kind", sc.network.kind == NetworkSource::Kind::Inline ? "dsl"
                           : sc.network.kind == NetworkSource::Kind::File ? "file"
                                                                          : "builtin"},
                  {"value", sc.network.value}};
  j["grid"] = {{"lengths", sc.lengths}, {"counts", sc.counts}};
  j["diffusion"] = sc.diffusion;
  if (!sc.sweep_factors.empty()) j["sweep_factors"] = sc.sweep_factors;
  j["dt"] = sc.dt;
  j["t_end"] = sc.t_end;
  j["stride"] = sc.stride;
  j["checks"] = sc.checks;
  json params = json::object();
  for (const auto& [check, p] : sc.params) params[check] = p;
  j["check_params"] = params;
  if (sc.truncation_radius) j["truncation_radius"] = *sc.truncation_radius;
  j["rescale"] = sc.rescale;
  if (!sc.z0.empty()) j["z0"] = sc.z0;
  j["expect_blowup"] = sc.expect_blowup;
  std::visit(
      [&](const auto& init) {
        using T = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<T, ConstantInit>) {
          j["initial"] = {{"type", "constant"}, {"values", init.values}};
        } else if constexpr (std::is_same_v<T, BumpInit>) {
          json centers = json::array();
          for (const auto& c : init.centers) centers.push_back({c[0], c[1]});
          j["initial"] = {{"type", "bump"},         {"base", init.base},   {"amplitude", init.amplitude},
                          {"center", centers},      {"width", init.width}, {"zero_mean", init.zero_mean}};
        } else {
          j["initial"] = {{"type", "random"}, {"lo", init.lo}, {"hi", init.hi}, {"seed", init.seed}};
        }
      },
      sc.initial);
  return j;
}

json summary_json(const Trajectory& traj, const SimConfig& config, const Scenario& scenario) {
  json j;
  j["scenario"] = scenario.name;
  j["species"] = traj.species;
  j["blowup"] = traj.blowup;
  if (traj.blowup) j["halt_reason"] = traj.halt_reason;
  j["steps"] = traj.steps;
  j["halvings"] = traj.halvings;
  j["samples"] = traj.samples.size();
  j["final_time"] = traj.samples.empty() ? 0.0 : traj.samples.back().t;
  const std::size_t m = traj.species.size();
  std::vector<double> sup_linf(m, 0.0), sup_l1(m, 0.0);
  for (const auto& s : traj.samples)
    for (std::size_t i = 0; i < m; ++i) {
      sup_linf[i] = std::max(sup_linf[i], s.linf[i]);
      sup_l1[i] = std::max(sup_l1[i], s.l1[i]);
    }
  j["sup_linf"] = sup_linf;
  j["sup_l1"] = sup_l1;
  if (!traj.samples.empty()) j["final_average"] = traj.samples.back().average;
  if (config.equilibrium) j["equilibrium"] = *config.equilibrium;
  j["rescale_factor"] = config.rescale_factor();
  j["effective_diffusion"] = config.effective_diffusion();
  j["config"] = scenario_json(scenario);
  return j;
}

json to_json(const InequalityInstance& inst) {
  return {{"label", inst.label}, {"lhs", inst.lhs}, {"rhs", inst.rhs}, {"verdict", inst.holds}};
}

json to_json(const CheckResult& r) {
  json inst = json::array();
  for (const auto& i : r.instances) inst.push_back(to_json(i));
  return {{"id", r.id},           {"pass", r.pass},         {"summary", r.summary},
          {"metrics", r.metrics}, {"instances", inst},      {"seconds", r.seconds}};
}

json to_json(const SweepTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    json row{{"factor", r.factor}, {"global", r.global}, {"sup_linf", r.sup_linf}, {"note", r.note}};
    if (r.fit) row["fit"] = {{"C", r.fit->amplitude}, {"lambda", r.fit->rate}, {"r2", r.fit->r2}};
    rows.push_back(row);
  }
  return {{"rows", rows}, {"rate_increasing", table.rate_increasing}};
}

std::string sweep_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "factor,global,sup_linf,lambda,r2\n";
  for (const auto& r : table.rows) {
    out << format_real(r.factor) << ',' << (r.global ? 1 : 0) << ',' << format_real(r.sup_linf) << ','
        << (r.fit ? format_real(r.fit->rate) : "") << ',' << (r.fit ? format_real(r.fit->r2) : "") << "\n";
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace rdslab
