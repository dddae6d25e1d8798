#include "rdslab/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "rdslab/equilibria.hpp"
#include "rdslab/error.hpp"
#include "rdslab/kernels.hpp"

namespace rdslab {

namespace {

using nlohmann::json;

SimConfig build_config(const Scenario& sc) {
  SimConfig cfg = make_sim_config(sc);
  for (const auto& id : sc.checks)
    if (const CheckSpec* spec = find_check(id); spec && spec->needs_fields) cfg.store_fields = true;
  if (!sc.snapshots.empty()) cfg.store_fields = true;
  return cfg;
}

Scenario with_seed(Scenario sc, std::optional<std::uint64_t> seed) {
  if (seed) apply_seed_override(sc, *seed);
  return sc;
}

// Collects inequality instances; the verdict is the conjunction.
class Verdict {
 public:
  explicit Verdict(std::string id) { result_.id = std::move(id); }

  bool require(std::string label, double lhs, double rhs, bool holds) {
    result_.instances.push_back({std::move(label), lhs, rhs, holds});
    ok_ = ok_ && holds;
    return holds;
  }
  bool at_most(std::string label, double lhs, double rhs) {
    return require(std::move(label), lhs, rhs, lhs <= rhs);
  }
  bool less(std::string label, double lhs, double rhs) { return require(std::move(label), lhs, rhs, lhs < rhs); }
  bool at_least(std::string label, double lhs, double rhs) {
    return require(std::move(label), lhs, rhs, lhs >= rhs);
  }
  void fail(const std::string& why) {
    ok_ = false;
    notes_.push_back(why);
  }
  void note(const std::string& what) { notes_.push_back(what); }
  json& metrics() { return result_.metrics; }

  CheckResult finish() {
    result_.pass = ok_;
    std::ostringstream s;
    s << (ok_ ? "pass" : "FAIL");
    std::size_t failed = 0;
    for (const auto& inst : result_.instances) failed += inst.holds ? 0 : 1;
    s << " (" << result_.instances.size() - failed << "/" << result_.instances.size() << " instances hold)";
    for (const auto& n : notes_) s << "; " << n;
    result_.summary = s.str();
    return std::move(result_);
  }

 private:
  CheckResult result_;
  bool ok_ = true;
  std::vector<std::string> notes_;
};

// Largest increase between consecutive entries.
double max_increase(const std::vector<double>& series) {
  double worst = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k) worst = std::max(worst, series[k] - series[k - 1]);
  return worst;
}

template <class Fn>
std::vector<double> series_of(const Trajectory& traj, Fn fn) {
  std::vector<double> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples) out.push_back(fn(s));
  return out;
}

double max_linf(const Diagnostics& d) { return *std::max_element(d.linf.begin(), d.linf.end()); }

double distance_inf(const FieldState& state, std::span<const double> target) {
  double worst = 0.0;
  for (std::size_t i = 0; i < state.species.size(); ++i)
    for (double v : state.species[i]) worst = std::max(worst, std::abs(v - target[i]));
  return worst;
}

json fit_json(const DecayFit& fit) {
  return {{"C", fit.amplitude}, {"lambda", fit.rate}, {"r2", fit.r2}, {"window", {fit.t_lo, fit.t_hi}},
          {"samples", fit.used}};
}

void require_global(Verdict& v, const Trajectory& traj) {
  v.require("no blow-up (samples recorded)", static_cast<double>(traj.samples.size()), 0.0, !traj.blowup);
  if (traj.blowup) v.note(traj.halt_reason);
}

// ---------------------------------------------------------------------------
// Trajectory checks

CheckResult check_mass_dissipation(RunContext& ctx) {
  Verdict v("mass-dissipation");
  const Trajectory& traj = ctx.trajectory();
  require_global(v, traj);
  const double tol = ctx.param("mass-dissipation", "tolerance", 1e-10) * static_cast<double>(traj.stride);
  const auto mass = series_of(traj, [](const Diagnostics& d) { return d.total_mass; });
  v.at_most("max increase of total mass between samples", max_increase(mass), tol);
  if (ctx.nonlinearity().is_mass_action())
    v.metrics()["dissipation_class"] = std::string(to_string(classify_dissipation(ctx.nonlinearity().network())));
  v.metrics()["initial_mass"] = mass.front();
  v.metrics()["final_mass"] = mass.back();
  return v.finish();
}

CheckResult check_equal_diffusion(RunContext& ctx) {
  Verdict v("equal-diffusion-maxprin");
  const auto& d = ctx.config().diffusion;
  const bool equal = std::all_of(d.begin(), d.end(), [&](double x) { return x == d.front(); });
  if (!equal) v.note("diffusion coefficients differ; the maximum principle argument does not apply");
  const Trajectory& traj = ctx.trajectory();
  require_global(v, traj);
  const double tol = ctx.param("equal-diffusion-maxprin", "tolerance", 1e-10) * static_cast<double>(traj.stride);
  const auto sum = series_of(traj, [](const Diagnostics& s) { return s.sum_linf; });
  v.at_most("max increase of |sum_i u_i|_inf between samples", max_increase(sum), tol);
  v.metrics()["equal_diffusion"] = equal;
  v.metrics()["initial_sum_linf"] = sum.front();
  v.metrics()["final_sum_linf"] = sum.back();
  return v.finish();
}

CheckResult check_averages_decay(RunContext& ctx) {
  Verdict v("averages-decay");
  const Trajectory& traj = ctx.trajectory();
  require_global(v, traj);
  const auto window = ctx.param_list("averages-decay", "window", {0.02, ctx.config().t_end});
  const double fraction = ctx.param("averages-decay", "rate_fraction", 0.8);
  const auto samples = static_cast<std::size_t>(ctx.param("averages-decay", "lipschitz_samples", 20000));
  if (window.size() != 2) throw ConfigError("averages-decay.window needs two entries");

  const auto t = traj.times();
  const auto dev = series_of(traj, [](const Diagnostics& d) { return d.deviation_linf; });
  const DecayFit fit = fit_exponential(t, dev, window[0], window[1]);
  v.metrics()["deviation_linf_fit"] = fit_json(fit);
  v.require("fitted rate of sum_i |u_i - avg u_i|_inf is positive", fit.rate, 0.0, fit.rate > 0.0);
  v.at_least("r^2 of the fit", fit.r2, ctx.param("averages-decay", "r2_min", 0.99));

  const std::size_t m = ctx.nonlinearity().species_count();
  std::vector<double> lo(m, 0.0), hi(m, 0.0);
  for (const auto& s : traj.samples)
    for (std::size_t i = 0; i < m; ++i) hi[i] = std::max(hi[i], s.linf[i]);
  if (!ctx.nonlinearity().is_mass_action())
    for (std::size_t i = 0; i < m; ++i) lo[i] = -hi[i];
  const double c_m = lipschitz_on_box(ctx.nonlinearity(), lo, hi, samples, ctx.seed(13));
  const double c_omega = poincare_constant(ctx.grid());
  const auto& d = ctx.config().effective_diffusion();
  const double d_min = *std::min_element(d.begin(), d.end());
  const double delta = poincare_gap(d_min, c_omega, c_m);
  v.metrics()["C_M"] = c_m;
  v.metrics()["C_Omega"] = c_omega;
  v.metrics()["delta"] = delta;
  v.metrics()["box_upper"] = hi;
  v.require("delta = 2 d_min C_Omega - C_M > 0", delta, 0.0, delta > 0.0);

  const auto dev2 = series_of(traj, [](const Diagnostics& s) { return s.deviation_l2sq; });
  const DecayFit fit2 = fit_exponential(t, dev2, window[0], window[1]);
  v.metrics()["deviation_l2sq_fit"] = fit_json(fit2);
  v.at_least("measured L2 deviation decay rate >= fraction * delta", fit2.rate, fraction * delta);
  return v.finish();
}

CheckResult check_averaged_ode_residual(RunContext& ctx) {
  Verdict v("averaged-ode-residual");
  const Trajectory& traj = ctx.trajectory();
  require_global(v, traj);
  const auto window = ctx.param_list("averaged-ode-residual", "window", {0.02, ctx.config().t_end});
  if (window.size() != 2) throw ConfigError("averaged-ode-residual.window needs two entries");
  const auto g = averaged_residual(traj, ctx.nonlinearity(), ctx.grid());
  std::vector<double> series;
  double peak = 0.0;
  std::size_t above = 0;
  for (const auto& gi : g) {
    double s = 0.0;
    for (double x : gi) s = std::max(s, std::abs(x));
    series.push_back(s);
    peak = std::max(peak, s);
    above += s > kDecayFloor ? 1 : 0;
  }
  v.metrics()["max_abs_g"] = peak;
  v.metrics()["samples_above_floor"] = above;
  v.metrics()["samples"] = series.size();
  try {
    const DecayFit fit = fit_exponential(traj.times(), series, window[0], window[1]);
    v.metrics()["g_fit"] = fit_json(fit);
    v.require("fitted rate of |g(t)|_inf is positive", fit.rate, 0.0, fit.rate > 0.0);
    v.at_least("r^2 of the fit", fit.r2, ctx.param("averaged-ode-residual", "r2_min", 0.95));
  } catch (const Error& e) {
    v.fail(std::string("no exponential fit of |g(t)|_inf: ") + e.what());
  }
  return v.finish();
}

CheckResult check_gac(RunContext& ctx) {
  Verdict v("gac-large-diffusion");
  const auto& f = ctx.nonlinearity();
  if (!f.is_mass_action()) throw ConfigError("gac-large-diffusion needs a mass-action network");
  const auto& net = f.network();
  const std::size_t m = f.species_count();
  const auto point = ctx.param_list("gac-large-diffusion", "balance_point", std::vector<double>(m, 1.0));
  const auto balance = check_complex_balance(net, point);
  double worst = 0.0;
  for (double r : balance.residuals) worst = std::max(worst, std::abs(r));
  v.require("complex balance residual at the reference point", worst, 1e-12 * balance.scale, balance.balanced);

  const Trajectory& traj = ctx.trajectory();
  require_global(v, traj);
  std::vector<double> u_inf;
  if (ctx.config().equilibrium) {
    u_inf = *ctx.config().equilibrium;
  } else {
    u_inf = solve_complex_balanced_equilibrium(net, traj.samples.front().average).u_inf;
  }
  v.metrics()["equilibrium"] = u_inf;
  v.metrics()["initial_average"] = traj.samples.front().average;

  const double dist = distance_inf(traj.final_state, u_inf);
  v.metrics()["final_time"] = traj.final_state.time;
  v.at_most("final L_inf distance to the complex-balanced equilibrium", dist,
            ctx.param("gac-large-diffusion", "tolerance", 1e-5));

  if (!traj.samples.front().entropy) {
    v.fail("entropy diagnostic needs a configured equilibrium");
  } else {
    const auto ent = series_of(traj, [](const Diagnostics& s) { return *s.entropy; });
    v.at_most("max increase of the relative entropy between samples", max_increase(ent),
              ctx.param("gac-large-diffusion", "entropy_tolerance", 1e-9));
    v.metrics()["initial_entropy"] = ent.front();
    v.metrics()["final_entropy"] = ent.back();
  }
  return v.finish();
}

CheckResult check_ode_pde(RunContext& ctx) {
  Verdict v("ode-pde-agreement");
  if (ctx.config().rescale) throw ConfigError("ode-pde-agreement does not support rescaled runs");
  if (ctx.config().truncation_radius) throw ConfigError("ode-pde-agreement does not support truncated runs");
  const double factor = ctx.param("ode-pde-agreement", "diffusion_factor", 4.0);
  SimConfig cfg = ctx.config();
  cfg.store_fields = false;
  cfg.equilibrium.reset();
  for (double& d : cfg.diffusion) d *= factor;
  const Trajectory traj = simulate(cfg);
  require_global(v, traj);

  const auto ode = simulate_ode(cfg.nonlinearity, traj.samples.front().average, cfg.dt, cfg.t_end, cfg.stride);
  const std::size_t n = std::min(ode.states.size(), traj.samples.size());
  double worst = 0.0, worst_t = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(ode.times[k] - traj.samples[k].t) > 1e-9 * (1.0 + ode.times[k]))
      throw Error("ODE and PDE sample times do not line up");
    for (std::size_t i = 0; i < ode.states[k].size(); ++i) {
      const double e = std::abs(ode.states[k][i] - traj.samples[k].average[i]);
      if (e > worst) {
        worst = e;
        worst_t = ode.times[k];
      }
    }
  }
  v.metrics()["diffusion_factor"] = factor;
  v.metrics()["diffusion"] = cfg.diffusion;
  v.metrics()["worst_time"] = worst_t;
  v.metrics()["compared_samples"] = n;
  v.at_most("sup_t |avg u(t) - v(t)|_inf", worst, ctx.param("ode-pde-agreement", "tolerance", 1e-3));
  return v.finish();
}

CheckResult check_boundary_equilibria(RunContext& ctx) {
  Verdict v("boundary-equilibria");
  const auto& f = ctx.nonlinearity();
  if (!f.is_mass_action() || !is_single_reversible_pair(f.network()))
    throw ConfigError("boundary-equilibria needs a single reversible pair");
  const auto& net = f.network();
  const double mu = growth_exponent(net);
  const double expected_mu = ctx.param("boundary-equilibria", "expected_mu", 2.0);
  v.require("growth exponent mu equals the expected value", mu, expected_mu, mu == expected_mu);

  const Trajectory& traj = ctx.trajectory();
  require_global(v, traj);
  const auto& mean0 = traj.samples.front().average;
  const auto positive = solve_single_reversible_equilibrium(net, mean0);
  const auto boundary = find_boundary_equilibria_single(net, mean0);
  v.metrics()["initial_average"] = mean0;
  v.metrics()["positive_equilibrium"] = positive.u_inf;
  json bj = json::array();
  for (const auto& b : boundary) bj.push_back(b.u_inf);
  v.metrics()["boundary_equilibria"] = bj;

  const double tol = ctx.param("boundary-equilibria", "tolerance", 1e-4);
  v.require("boundary equilibria detected", static_cast<double>(boundary.size()), 1.0, !boundary.empty());
  const double dist = distance_inf(traj.final_state, positive.u_inf);
  v.at_most("final L_inf distance to the positive equilibrium", dist, tol);
  for (const auto& b : boundary) {
    const double db = distance_inf(traj.final_state, b.u_inf);
    v.require("final L_inf distance to a boundary equilibrium exceeds the tolerance", db, tol, db > tol);
  }

  const UniformBoundReport ub = uniform_bound_report(traj);
  v.metrics()["sup_linf"] = ub.sup_linf;
  v.metrics()["sup_l1"] = ub.sup_l1;
  v.at_most("tail ratio sup(last third) / sup(middle third)", ub.tail_ratio,
            ctx.param("boundary-equilibria", "tail_ratio", kTailTolerance));
  return v.finish();
}

CheckResult check_truncation(RunContext& ctx) {
  Verdict v("truncation-consistency");
  const Trajectory& plain = ctx.trajectory();
  const double radius = ctx.param("truncation-consistency", "radius", 10.0);
  SimConfig cfg = ctx.config();
  cfg.store_fields = false;
  cfg.truncation_radius = radius;
  const Trajectory cut = simulate(cfg);

  double sup_vec = 0.0;
  for (const auto& s : plain.samples) {
    double sq = 0.0;
    for (std::size_t i = 0; i < s.linf.size(); ++i) {
      const double bound = s.linf[i] + std::abs(cfg.shift(i));
      sq += bound * bound;
    }
    sup_vec = std::max(sup_vec, std::sqrt(sq));
  }
  v.less("sup_t of the pointwise vector norm bound stays inside the ball", sup_vec, radius);
  v.require("sample counts agree", static_cast<double>(cut.samples.size()), static_cast<double>(plain.samples.size()),
            cut.samples.size() == plain.samples.size() && cut.blowup == plain.blowup);

  double worst = 0.0;
  const std::size_t n = std::min(cut.samples.size(), plain.samples.size());
  auto cmp = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = plain.samples[k];
    const auto& b = cut.samples[k];
    cmp(a.t, b.t);
    cmp(a.total_mass, b.total_mass);
    cmp(a.sum_linf, b.sum_linf);
    cmp(a.deviation_linf, b.deviation_linf);
    cmp(a.deviation_l2sq, b.deviation_l2sq);
    for (std::size_t i = 0; i < a.linf.size(); ++i) {
      cmp(a.l1[i], b.l1[i]);
      cmp(a.l2[i], b.l2[i]);
      cmp(a.linf[i], b.linf[i]);
      cmp(a.average[i], b.average[i]);
    }
    if (a.entropy && b.entropy) cmp(*a.entropy, *b.entropy);
  }
  v.metrics()["radius"] = radius;
  v.at_most("max |truncated - untruncated| over all diagnostics", worst,
            ctx.param("truncation-consistency", "tolerance", 1e-10));
  return v.finish();
}

CheckResult check_gronwall(RunContext& ctx) {
  Verdict v("gronwall-ceiling");
  const SimConfig& cfg = ctx.config();
  if (!cfg.truncation_radius || !cfg.rescale)
    throw ConfigError("gronwall-ceiling needs a truncated run with the rescale flag");
  const Trajectory& traj = ctx.trajectory();
  require_global(v, traj);
  const double a = cfg.rescale_factor();
  const int K = large_diffusion_K(static_cast<int>(cfg.grid.dim())).K;
  const auto samples = static_cast<std::size_t>(ctx.param("gronwall-ceiling", "lipschitz_samples", 20000));
  const LipschitzEstimate lip =
      lipschitz_estimate(cfg.nonlinearity, CutoffPhi(*cfg.truncation_radius), samples, ctx.seed(11), cfg.z0);
  const double l_r = lip.value();
  const double m = traj.samples.front().shifted_linf;
  const double ceiling = gronwall_ceiling(m, a, l_r, K);
  const double slack = 1.0 + ctx.param("gronwall-ceiling", "slack", 1e-3);
  v.metrics()["a"] = a;
  v.metrics()["L_r"] = l_r;
  v.metrics()["L_r_pairwise"] = lip.pairwise;
  v.metrics()["K"] = K;
  v.metrics()["M"] = m;
  v.metrics()["ceiling"] = ceiling;
  v.at_most("a L_r <= 1", a * l_r, 1.0);

  const double horizon = K + 1.0;
  double worst = 0.0, worst_ratio = 0.0, covered = 0.0;
  for (const auto& s : traj.samples) {
    if (s.t > horizon + 1e-12) break;
    covered = s.t;
    worst = std::max(worst, s.shifted_linf);
    if (m > 0.0) worst_ratio = std::max(worst_ratio, s.shifted_linf / (m * std::exp(a * l_r * s.t)));
  }
  v.metrics()["covered_until"] = covered;
  if (covered + 1e-12 < horizon) v.note("trajectory ends before K + 1");
  v.at_most("sup_{t <= K+1} |v(t) - z0|_inf against the ceiling", worst, ceiling * slack);
  v.at_most("max_t |v(t) - z0|_inf / (M e^{a L_r t})", worst_ratio, slack);
  return v.finish();
}

CheckResult check_small_data(RunContext& ctx) {
  Verdict v("small-data");
  const Trajectory& traj = ctx.trajectory();
  require_global(v, traj);
  const double eps = ctx.param("small-data", "epsilon", 1e-2);
  const double factor = ctx.param("small-data", "ceiling_factor", 10.0);
  const double m0 = traj.samples.front().shifted_linf;
  v.at_most("initial |u_0 - z_0|_inf <= epsilon", m0, eps * (1.0 + 1e-12));
  double sup = 0.0;
  for (const auto& s : traj.samples) sup = std::max(sup, s.shifted_linf);
  v.at_most("sup_t |u(t) - z_0|_inf <= ceiling_factor * epsilon", sup, factor * eps);
  v.metrics()["final_time"] = traj.samples.back().t;
  if (!traj.samples.front().lyapunov) {
    v.fail("the nonlinearity declares no Lyapunov diagnostic");
  } else {
    const auto lyap = series_of(traj, [](const Diagnostics& s) { return *s.lyapunov; });
    v.at_most("max increase of the declared Lyapunov functional between samples", max_increase(lyap),
              ctx.param("small-data", "lyapunov_tolerance", 1e-8));
    v.metrics()["lyapunov"] = ctx.nonlinearity().lyapunov_hint()->description;
    v.metrics()["initial_lyapunov"] = lyap.front();
    v.metrics()["final_lyapunov"] = lyap.back();
  }
  return v.finish();
}

CheckResult check_close_to_equilibrium(RunContext& ctx) {
  Verdict v("close-to-equilibrium");
  if (ctx.config().z0.empty()) throw ConfigError("close-to-equilibrium needs options.z0");
  const Trajectory& traj = ctx.trajectory();
  require_global(v, traj);
  const double m = traj.samples.front().shifted_linf;
  double sup = 0.0;
  for (const auto& s : traj.samples) sup = std::max(sup, s.shifted_linf);
  v.metrics()["M"] = m;
  v.metrics()["z0"] = ctx.config().z0;
  v.at_most("sup_t |u(t) - z0|_inf <= ceiling_factor * M", sup,
            ctx.param("close-to-equilibrium", "ceiling_factor", 10.0) * m);
  v.at_most("final |u(T) - z0|_inf", traj.samples.back().shifted_linf,
            ctx.param("close-to-equilibrium", "tolerance", 1e-6));
  return v.finish();
}

CheckResult check_uniform_bound(RunContext& ctx) {
  Verdict v("uniform-bound");
  const Trajectory& traj = ctx.trajectory();
  const UniformBoundReport ub = uniform_bound_report(traj);
  v.require("global run", static_cast<double>(traj.samples.size()), 0.0, ub.global);
  v.at_most("tail ratio sup(last third) / sup(middle third)", ub.tail_ratio,
            ctx.param("uniform-bound", "tail_ratio", kTailTolerance));
  v.metrics()["sup_linf"] = ub.sup_linf;
  v.metrics()["sup_l1"] = ub.sup_l1;
  v.metrics()["mass_nonincreasing"] = ub.mass_nonincreasing;
  v.metrics()["max_mass_drift"] = ub.max_mass_drift;
  return v.finish();
}

CheckResult check_quasi_uniform(RunContext& ctx) {
  Verdict v("quasi-uniform-condition");
  const auto& f = ctx.nonlinearity();
  const double mu = f.is_mass_action() ? growth_exponent(f.network()) : ctx.param("quasi-uniform-condition", "mu", 2.0);
  const auto sources = static_cast<std::size_t>(ctx.param("quasi-uniform-condition", "sources", 8));
  const double horizon = ctx.param("quasi-uniform-condition", "horizon", 5.0);
  const double dt = ctx.param("quasi-uniform-condition", "dt", 1e-2);
  const auto d = ctx.config().effective_diffusion();
  const auto rep = quasi_uniform_condition(d, static_cast<int>(ctx.grid().dim()), mu,
                                           empirical_regularity(ctx.grid(), sources, horizon, dt, ctx.seed(1)));
  for (const auto& inst : rep.instances) v.require(inst.label, inst.lhs, inst.rhs, inst.holds);
  if (rep.vacuous) v.note("K = 0: condition is vacuous");
  v.metrics()["mu"] = mu;
  v.metrics()["K"] = rep.K;
  v.metrics()["d_max"] = rep.d_max;
  v.metrics()["d_min"] = rep.d_min;
  v.metrics()["vacuous"] = rep.vacuous;
  return v.finish();
}

CheckResult check_diffusion_sweep(RunContext& ctx) {
  Verdict v("diffusion-sweep");
  std::vector<double> factors = ctx.scenario().sweep_factors;
  factors = ctx.param_list("diffusion-sweep", "factors", factors.empty() ? std::vector<double>{1.0, 8.0} : factors);
  const auto window = ctx.param_list("diffusion-sweep", "window", {0.0, ctx.config().t_end});
  if (window.size() != 2) throw ConfigError("diffusion-sweep.window needs two entries");
  const SweepTable table = sweep_diffusion(ctx.scenario(), factors, window[0], window[1]);
  json rows = json::array();
  std::size_t fitted = 0;
  for (const auto& r : table.rows) {
    json row{{"factor", r.factor}, {"global", r.global}, {"sup_linf", r.sup_linf}, {"note", r.note}};
    if (r.fit) {
      row["fit"] = fit_json(*r.fit);
      ++fitted;
    }
    rows.push_back(row);
  }
  v.metrics()["rows"] = rows;
  v.at_least("rows with a decay fit", static_cast<double>(fitted), 2.0);
  v.require("fitted rate increases with the diffusion factor", static_cast<double>(fitted), 0.0,
            table.rate_increasing);
  return v.finish();
}

// ---------------------------------------------------------------------------
// Checks without a trajectory

CheckResult check_scaling_law(RunContext& ctx) {
  Verdict v("scaling-law");
  const auto ds = ctx.param_list("scaling-law", "diffusions", {1.0, 2.0, 4.0, 8.0});
  const double tol = ctx.param("scaling-law", "tolerance", 0.2);
  RegularityOptions opt;
  opt.p = ctx.param("scaling-law", "p", 2.0);
  opt.sources = static_cast<std::size_t>(ctx.param("scaling-law", "sources", 8));
  opt.horizon = ctx.param("scaling-law", "horizon", 5.0);
  opt.dt = ctx.param("scaling-law", "dt", 1e-2);
  opt.seed = ctx.seed(1);
  std::vector<double> products, c_hat;
  for (double d : ds) {
    opt.diffusion = d;
    const auto est = estimate_regularity_constant(ctx.grid(), opt);
    c_hat.push_back(est.c_hat);
    products.push_back(est.c_hat * d);
  }
  if (products.empty()) throw ConfigError("scaling-law.diffusions is empty");
  double mean = 0.0;
  for (double p : products) mean += p;
  mean /= static_cast<double>(products.size());
  for (std::size_t k = 0; k < ds.size(); ++k) {
    std::ostringstream label;
    label << "|C_hat(d) d / mean - 1| at d = " << ds[k];
    v.at_most(label.str(), std::abs(products[k] / mean - 1.0), tol);
  }
  v.metrics()["diffusions"] = ds;
  v.metrics()["c_hat"] = c_hat;
  v.metrics()["c_hat_times_d"] = products;
  v.metrics()["mean"] = mean;
  return v.finish();
}

CheckResult check_poincare(RunContext& ctx) {
  Verdict v("poincare");
  const auto counts = ctx.param_list("poincare", "counts", {32.0, 64.0, 128.0});
  const double length = ctx.param("poincare", "length", 1.0);
  const double target = std::numbers::pi * std::numbers::pi / (length * length);
  std::vector<double> errors, constants;
  for (double n : counts) {
    const double c = poincare_constant(SpatialGrid::interval(length, static_cast<std::size_t>(n)));
    constants.push_back(c);
    errors.push_back(std::abs(c - target));
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double ratio = errors[k - 1] / errors[k];
    std::ostringstream label;
    label << "error ratio N = " << counts[k - 1] << " -> " << counts[k] << " within [3.5, 4.5]";
    v.require(label.str(), ratio, 4.0, ratio >= 3.5 && ratio <= 4.5);
  }
  v.metrics()["counts"] = counts;
  v.metrics()["C_Omega"] = constants;
  v.metrics()["errors"] = errors;
  return v.finish();
}

void add_schedule_properties(Verdict& v, const BootstrapSchedule& s) {
  std::ostringstream tag;
  tag << " (n=" << s.n << ", mu=" << s.mu << ")";
  for (const auto& inst : schedule_exponent_inequalities(s)) v.require(inst.label + tag.str(), inst.lhs, inst.rhs, inst.holds);
  bool q_up = true, p_up = true, ratio_ok = true;
  double worst_ratio = std::numeric_limits<double>::infinity();
  const double nn = s.n;
  const double bound = (nn + 2.0) / (s.mu * (nn + 2.0) - 2.0 * s.p.front());
  for (std::size_t k = 1; k < s.q.size(); ++k) q_up = q_up && s.q[k] > s.q[k - 1];
  for (std::size_t k = 1; k < s.p.size(); ++k) {
    p_up = p_up && s.p[k] > s.p[k - 1];
    const double r = s.p[k] / s.p[k - 1];
    // Equality at k = 1, where p_k = p_0; strict afterwards.
    const bool ok = k == 1 ? r >= bound * (1.0 - 1e-12) : r > bound;
    ratio_ok = ratio_ok && ok;
    worst_ratio = std::min(worst_ratio, r / bound);
  }
  v.require("q strictly increasing" + tag.str(), static_cast<double>(s.q.size()), 0.0, q_up);
  v.require("p strictly increasing" + tag.str(), static_cast<double>(s.p.size()), 0.0, p_up);
  if (s.p.size() > 1)
    v.require("p_{k+1}/p_k against (n+2)/(mu(n+2) - 2 p_0)" + tag.str(), worst_ratio, 1.0, ratio_ok);
}

CheckResult check_exponent_schedules(RunContext&) {
  Verdict v("exponent-schedules");
  const struct {
    int n;
    double mu;
    int K;
  } table[] = {{1, 2.0, 2}, {2, 2.0, 3}, {1, 1.0, 0}};
  for (const auto& row : table) {
    const auto s = bootstrap_schedule(row.n, row.mu);
    std::ostringstream label;
    label << "bootstrap K for n=" << row.n << ", mu=" << row.mu;
    v.require(label.str(), s.K, row.K, s.K == row.K);
  }
  const std::pair<int, int> large[] = {{1, 0}, {2, 1}, {4, 2}};
  for (const auto& [n, K] : large) {
    const auto e = large_diffusion_K(n);
    v.require("large-diffusion K for n=" + std::to_string(n), e.K, K, e.K == K && e.L == K + 2);
  }
  json schedules = json::array();
  for (int n = 1; n <= 4; ++n) {
    for (double mu : {1.0, 1.5, 2.0, 3.0, 4.0}) {
      const auto s = bootstrap_schedule(n, mu);
      add_schedule_properties(v, s);
      schedules.push_back({{"n", n}, {"mu", mu}, {"K", s.K}, {"q", s.q}, {"k0", s.k0}, {"p", s.p}});
    }
  }
  v.metrics()["schedules"] = schedules;
  return v.finish();
}

// ---------------------------------------------------------------------------
// Property checks over fixed corpora

const std::vector<std::string>& network_corpus() {
  static const std::vector<std::string> corpus = {
      "A + B -> C @ 1\n",
      "A <-> B @ 1, 1\n",
      "A -> B @ 1\nB -> C @ 1\nC -> A @ 1\n",
      "A + B <-> 2 B @ 1, 2\n",
      "2 A <-> B @ 1.5, 0.5\n",
      "A <-> B @ 1, 2\nB <-> C @ 3, 1\nC <-> A @ 0.5, 1\n",
      "A + B -> 0 @ 0.5\n0 -> A @ 0.1\n",
      "2 A -> A @ 1\n",
      "A + 2 B -> 3 B @ 0.7\nB -> A @ 1.3\n",
      "A + B <-> C @ 2, 1\nC -> A + D @ 0.5\n",
  };
  return corpus;
}

// Networks whose complex-balanced equilibria exist for every rate choice
// (weakly reversible, deficiency zero).
const std::vector<std::string>& balanced_corpus() {
  static const std::vector<std::string> corpus = {
      "A <-> B @ 1, 1\n",
      "A -> B @ 1\nB -> C @ 1\nC -> A @ 1\n",
      "A + B <-> 2 B @ 1, 2\n",
      "2 A <-> B @ 1.5, 0.5\n",
      "A <-> B @ 1, 2\nB <-> C @ 3, 1\nC <-> A @ 0.5, 1\n",
      "A + B <-> C @ 2, 1\n",
  };
  return corpus;
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

CheckResult check_network_properties(RunContext& ctx) {
  Verdict v("network-properties");
  std::mt19937_64 rng(ctx.seed(101));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t trials = static_cast<std::size_t>(ctx.param("network-properties", "samples", 1000));
  json classes = json::array();
  for (const auto& text : network_corpus()) {
    const ReactionNetwork net = parse_network(text);
    const Nonlinearity f = Nonlinearity::mass_action(net);
    const std::size_t m = net.species_count();
    const std::string tag = " [" + format_network(net).substr(0, format_network(net).find('\n')) + " ...]";

    const auto qp = check_quasi_positivity(f, trials, 10.0, ctx.seed(7));
    v.require("quasi-positivity" + tag, static_cast<double>(qp.trials), 0.0, qp.pass);

    // Independent sampling of the boundary faces.
    bool face_ok = true;
    std::vector<double> u(m), out(m);
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t face = t % m;
      for (double& x : u) x = 10.0 * unit(rng);
      u[face] = 0.0;
      f.evaluate(u, out);
      face_ok = face_ok && out[face] >= 0.0;
    }
    v.require("f_i >= 0 on the face u_i = 0" + tag, 0.0, 0.0, face_ok);

    const auto cls = classify_dissipation(net);
    classes.push_back({{"network", format_network(net)}, {"class", std::string(to_string(cls))}});
    const Eigen::MatrixXd w = conservation_laws(net);
    const double mu = growth_exponent(net);
    double c = 0.0;
    for (const auto& rx : net.reactions()) {
      double dmax = 0.0;
      for (std::size_t i = 0; i < m; ++i) dmax = std::max(dmax, std::abs(rx.products[i] - rx.reactants[i]));
      c += rx.rate * dmax;
    }
    c *= static_cast<double>(m);

    double worst_cons = 0.0, worst_diss = -std::numeric_limits<double>::infinity(), worst_growth = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      for (double& x : u) x = 1e-3 + 10.0 * unit(rng);
      f.evaluate(u, out);
      const double fnorm = norm_inf(out);
      if (cls == DissipationClass::Conservative) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
          double s = 0.0;
          for (std::size_t i = 0; i < m; ++i) s += w(r, static_cast<Eigen::Index>(i)) * out[i];
          worst_cons = std::max(worst_cons, std::abs(s) / (1.0 + fnorm));
        }
      }
      if (cls == DissipationClass::Dissipative) {
        double s = 0.0;
        for (double x : out) s += x;
        worst_diss = std::max(worst_diss, s);
      }
      double f2 = 0.0;
      for (double x : out) f2 += x * x;
      worst_growth = std::max(worst_growth, std::sqrt(f2) / (c * (1.0 + std::pow(norm_inf(u), mu))));
    }
    if (cls == DissipationClass::Conservative) v.at_most("w^T f(u) = 0 for conservation rows" + tag, worst_cons, 1e-12);
    if (cls == DissipationClass::Dissipative) v.at_most("1^T f(u) <= 0" + tag, worst_diss, 1e-12);
    v.at_most("|f(u)| / (C (1 + |u|^mu))" + tag, worst_growth, 1.0);

    const ReactionNetwork again = parse_network(format_network(net));
    v.require("parse(format(parse(text))) = parse(text)" + tag, 0.0, 0.0, again == net);
  }

  const auto rem = check_quasi_positivity(Nonlinearity::builtin("remark-1-4"), trials, 10.0, ctx.seed(7));
  v.require("quasi-positivity [remark-1-4]", static_cast<double>(rem.trials), 0.0, rem.pass);
  v.metrics()["classes"] = classes;
  return v.finish();
}

CheckResult check_equilibria_properties(RunContext& ctx) {
  Verdict v("equilibria-properties");
  std::mt19937_64 rng(ctx.seed(202));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t trials = static_cast<std::size_t>(ctx.param("equilibria-properties", "samples", 1000));
  const std::size_t states = static_cast<std::size_t>(ctx.param("equilibria-properties", "states", 20));

  for (const auto& text : balanced_corpus()) {
    const ReactionNetwork net = parse_network(text);
    const Nonlinearity f = Nonlinearity::mass_action(net);
    const std::size_t m = net.species_count();
    const Eigen::MatrixXd w = conservation_laws(net);
    const std::string tag = " [" + format_network(net).substr(0, format_network(net).find('\n')) + " ...]";
    double worst_f = 0.0, worst_class = 0.0, worst_agree = 0.0;
    bool all_positive = true;
    for (std::size_t s = 0; s < states; ++s) {
      std::vector<double> u0(m);
      for (double& x : u0) x = 0.1 + 3.0 * unit(rng);
      const auto sol = solve_complex_balanced_equilibrium(net, u0);
      double maxflow = 0.0;
      for (const auto& rx : net.reactions()) maxflow = std::max(maxflow, rx.rate * monomial(sol.u_inf, rx.reactants));
      worst_f = std::max(worst_f, norm_inf(f.evaluate(sol.u_inf)) / (1.0 + maxflow));
      for (double x : sol.u_inf) all_positive = all_positive && x > 0.0;
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        double a = 0.0, b = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          a += w(r, static_cast<Eigen::Index>(i)) * sol.u_inf[i];
          b += w(r, static_cast<Eigen::Index>(i)) * u0[i];
          scale += std::abs(w(r, static_cast<Eigen::Index>(i)) * u0[i]);
        }
        worst_class = std::max(worst_class, std::abs(a - b) / std::max(scale, 1e-300));
      }
      if (is_single_reversible_pair(net)) {
        const auto alt = solve_single_reversible_equilibrium(net, u0);
        for (std::size_t i = 0; i < m; ++i) worst_agree = std::max(worst_agree, std::abs(alt.u_inf[i] - sol.u_inf[i]));
      }
    }
    v.at_most("|f(u_inf)|_inf / (1 + max flow)" + tag, worst_f, 1e-10);
    v.at_most("relative class drift |W u_inf - W u0|" + tag, worst_class, 1e-8);
    v.require("equilibria are positive" + tag, 0.0, 0.0, all_positive);
    if (is_single_reversible_pair(net)) v.at_most("single-reversible vs entropy minimisation" + tag, worst_agree, 1e-8);
  }

  double min_entropy = std::numeric_limits<double>::infinity();
  bool zero_only_at_target = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t m = 1 + t % 4;
    std::vector<double> u(m), u_inf(m);
    for (std::size_t i = 0; i < m; ++i) {
      u[i] = 5.0 * unit(rng);
      u_inf[i] = 0.01 + 5.0 * unit(rng);
    }
    const double e = relative_entropy(u, u_inf);
    min_entropy = std::min(min_entropy, e);
    std::vector<double> diff(m);
    for (std::size_t i = 0; i < m; ++i) diff[i] = u[i] - u_inf[i];
    if (e == 0.0 && norm_inf(diff) > 1e-14) zero_only_at_target = false;
    if (relative_entropy(u_inf, u_inf) != 0.0) zero_only_at_target = false;
  }
  v.at_least("min relative entropy over random pairs", min_entropy, 0.0);
  v.require("entropy vanishes only at u = u_inf", 0.0, 0.0, zero_only_at_target);
  return v.finish();
}

CheckResult check_grid_properties(RunContext& ctx) {
  Verdict v("grid-properties");
  std::mt19937_64 rng(ctx.seed(303));
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t fields = static_cast<std::size_t>(ctx.param("grid-properties", "fields", 100));
  const SpatialGrid grids[] = {SpatialGrid::interval(1.0, 64), SpatialGrid::interval(2.5, 37),
                               SpatialGrid::rectangle(1.0, 1.0, 16, 12)};
  for (const auto& g : grids) {
    std::ostringstream tagstream;
    tagstream << " [dim " << g.dim() << ", " << g.node_count() << " nodes]";
    const std::string tag = tagstream.str();
    const std::size_t n = g.node_count();
    const double w = g.cell_volume();
    const double c_omega = poincare_constant(g);
    double worst_div = 0.0, worst_poincare = std::numeric_limits<double>::infinity();
    bool contraction = true;
    Field u(n), lap(n);
    for (std::size_t k = 0; k < fields; ++k) {
      for (double& x : u) x = normal(rng);
      laplacian(u, lap, g);
      double s = 0.0;
      for (double x : lap) s += x;
      worst_div = std::max(worst_div, std::abs(s) / (norm_inf(u) * static_cast<double>(n)));

      const double avg = spatial_average(u, g);
      for (double& x : u) x -= avg;
      double energy = dirichlet_energy(u, g);
      double mass = 0.0;
      for (double x : u) mass += x * x * w;
      worst_poincare = std::min(worst_poincare, energy - (c_omega - 1e-9) * mass);

      const Field h = heat_solve_implicit(u, g, 0.7, 0.01);
      for (double p : {1.0, 2.0, kInfNorm})
        contraction = contraction && lp_norm(h, g, p) <= lp_norm(u, g, p) * (1.0 + 1e-12);
    }
    v.at_most("|sum lap_h u| / (|u|_inf N)" + tag, worst_div, 1e-13);
    v.at_least("min of |grad_h u|^2 - (C_Omega - 1e-9) |u|^2 over zero-mean fields" + tag, worst_poincare, 0.0);
    v.require("backward-Euler heat step contracts L1, L2, Linf" + tag, 0.0, 0.0, contraction);
  }

  RegularityOptions opt;
  opt.seed = ctx.seed(1);
  const SpatialGrid g = SpatialGrid::interval(1.0, 64);
  opt.diffusion = 1.0;
  const double c1 = estimate_regularity_constant(g, opt).c_hat;
  opt.diffusion = 2.0;
  const double c2 = estimate_regularity_constant(g, opt).c_hat;
  const double ratio = c2 * 2.0 / c1;
  v.require("C_hat(2d) 2 / C_hat(d) within [0.8, 1.2]", ratio, 1.0, ratio >= 0.8 && ratio <= 1.2);
  return v.finish();
}

CheckResult check_analysis_properties(RunContext& ctx) {
  Verdict v("analysis-properties");
  std::mt19937_64 rng(ctx.seed(404));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  bool dominated = true;
  const std::size_t pairs = static_cast<std::size_t>(ctx.param("analysis-properties", "young_pairs", 1000));
  const std::size_t grid_points = 10000;
  for (std::size_t k = 0; k < pairs && dominated; ++k) {
    const double a = 5.0 * unit(rng);
    const double eps = 0.01 + 0.98 * unit(rng);
    const double bound = young_bound(a, eps);
    const double top = 2.0 * std::pow(a, 1.0 / (1.0 - eps)) + 1.0;
    for (std::size_t j = 0; j <= grid_points; ++j) {
      const double x = top * static_cast<double>(j) / grid_points;
      if (x <= a * std::pow(x, eps) && x > bound * (1.0 + 1e-12)) {
        dominated = false;
        break;
      }
    }
  }
  v.require("X <= A X^eps implies X <= young_bound(A, eps) on a 10^4-point grid", 0.0, 0.0, dominated);
  v.at_most("young_bound(1, 1/2) = 1", std::abs(young_bound(1.0, 0.5) - 1.0), 1e-15);
  v.at_most("gronwall_ceiling(1, 1, 1, 0) = e", std::abs(gronwall_ceiling(1.0, 1.0, 1.0, 0) - std::exp(1.0)), 1e-15);
  v.at_most("b_m_bound(1, 1, 1/2, 1, 0) = 9", std::abs(b_m_bound(1.0, 1.0, 0.5, 1.0, 0).value - 9.0), 1e-12);

  double worst_c = 0.0, worst_l = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    const double c = 0.1 + 5.0 * unit(rng);
    const double lambda = 0.1 + 5.0 * unit(rng);
    std::vector<double> t, y;
    for (int i = 0; i <= 40; ++i) {
      t.push_back(0.05 * i);
      y.push_back(c * std::exp(-lambda * t.back()));
    }
    const DecayFit fit = fit_exponential(t, y, 0.0, 2.0);
    worst_c = std::max(worst_c, std::abs(fit.amplitude - c) / c);
    worst_l = std::max(worst_l, std::abs(fit.rate - lambda));
  }
  v.at_most("planted amplitude recovered (relative)", worst_c, 1e-10);
  v.at_most("planted rate recovered", worst_l, 1e-10);

  const auto qu = quasi_uniform_condition(std::vector<double>{1.0, 3.0}, 1, 2.0, [](double, double) { return 1.0; });
  v.require("(1,3) with C = 1 fails the quasi-uniform condition", qu.instances.front().lhs, 1.0, !qu.pass);
  const auto qu2 = quasi_uniform_condition(std::vector<double>{1.0, 1.5}, 1, 2.0, [](double, double) { return 1.0; });
  v.require("(1,1.5) with C = 1 passes the quasi-uniform condition", qu2.instances.front().lhs, 1.0, qu2.pass);
  return v.finish();
}

std::vector<CheckSpec> make_registry() {
  std::vector<CheckSpec> r;
  auto add = [&](std::string id, std::string desc, std::vector<std::string> params, bool fields, CheckFunction fn) {
    r.push_back({std::move(id), std::move(desc), std::move(params), fields, std::move(fn)});
  };
  add("mass-dissipation", "total mass nonincreasing between samples", {"tolerance"}, false, check_mass_dissipation);
  add("equal-diffusion-maxprin", "|sum_i u_i|_inf nonincreasing with equal diffusion", {"tolerance"}, false,
      check_equal_diffusion);
  add("scaling-law", "C_hat(d) d constant across a diffusion sweep",
      {"diffusions", "p", "sources", "horizon", "dt", "tolerance"}, false, check_scaling_law);
  add("poincare", "discrete Poincare constant converges to pi^2/L^2 at second order", {"counts", "length"}, false,
      check_poincare);
  add("averages-decay", "exponential decay of deviations from the spatial averages",
      {"window", "rate_fraction", "lipschitz_samples", "r2_min"}, false, check_averages_decay);
  add("averaged-ode-residual", "exponential decay of g(t) = avg f(u) - f(avg u)", {"window", "r2_min"}, true,
      check_averaged_ode_residual);
  add("gac-large-diffusion", "convergence to the complex-balanced equilibrium with entropy decay",
      {"balance_point", "tolerance", "entropy_tolerance"}, false, check_gac);
  add("ode-pde-agreement", "spatial averages follow the reaction ODE", {"diffusion_factor", "tolerance"}, false,
      check_ode_pde);
  add("boundary-equilibria", "convergence to the positive, not the boundary, equilibrium",
      {"expected_mu", "tolerance", "tail_ratio"}, false, check_boundary_equilibria);
  add("truncation-consistency", "truncated and untruncated runs coincide inside the ball", {"radius", "tolerance"},
      false, check_truncation);
  add("exponent-schedules", "bootstrap and large-diffusion exponent tables", {}, false, check_exponent_schedules);
  add("gronwall-ceiling", "truncated rescaled run stays below M e^{a L_r t}", {"lipschitz_samples", "slack"}, false,
      check_gronwall);
  add("small-data", "small perturbations stay small and the declared Lyapunov functional decays",
      {"epsilon", "ceiling_factor", "lyapunov_tolerance"}, false, check_small_data);
  add("close-to-equilibrium", "data near an equilibrium stay near and converge", {"ceiling_factor", "tolerance"},
      false, check_close_to_equilibrium);
  add("uniform-bound", "sup norms flat in the tail of the run", {"tail_ratio"}, false, check_uniform_bound);
  add("quasi-uniform-condition", "(d_max - d_min)/2 C_{d,q~_k} < 1 with the empirical C",
      {"mu", "sources", "horizon", "dt"}, false, check_quasi_uniform);
  add("diffusion-sweep", "decay rate grows with the diffusion factor", {"factors", "window"}, false,
      check_diffusion_sweep);
  add("network-properties", "structural invariants over a network corpus", {"samples"}, false,
      check_network_properties);
  add("equilibria-properties", "equilibrium and entropy invariants", {"samples", "states"}, false,
      check_equilibria_properties);
  add("grid-properties", "discrete divergence, Poincare, contraction and scaling invariants", {"fields"}, false,
      check_grid_properties);
  add("analysis-properties", "bound formulas and decay fits", {"young_pairs"}, false, check_analysis_properties);
  return r;
}

}  // namespace

RunContext::RunContext(Scenario scenario, std::optional<std::uint64_t> seed_override)
    : scenario_(with_seed(std::move(scenario), seed_override)),
      config_(build_config(scenario_)),
      seed_override_(seed_override) {}

const Trajectory& RunContext::trajectory() {
  if (!trajectory_) trajectory_ = simulate(config_);
  return *trajectory_;
}

double RunContext::param(std::string_view check, std::string_view key, double fallback) const {
  const auto& p = scenario_.check_params(check);
  const auto it = p.find(std::string(key));
  if (it == p.end()) return fallback;
  const auto values = parse_real_list(it->second, std::string(check) + "." + std::string(key));
  if (values.size() != 1) throw ConfigError(std::string(check) + "." + std::string(key) + " needs a single value");
  return values.front();
}

std::vector<double> RunContext::param_list(std::string_view check, std::string_view key,
                                           std::vector<double> fallback) const {
  const auto& p = scenario_.check_params(check);
  const auto it = p.find(std::string(key));
  if (it == p.end()) return fallback;
  return parse_real_list(it->second, std::string(check) + "." + std::string(key));
}

const std::vector<CheckSpec>& check_registry() {
  static const std::vector<CheckSpec> registry = make_registry();
  return registry;
}

const CheckSpec* find_check(std::string_view id) {
  for (const auto& c : check_registry())
    if (c.id == id) return &c;
  return nullptr;
}

CheckResult run_check(const CheckSpec& spec, RunContext& context) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult result;
  try {
    result = spec.run(context);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    result.id = spec.id;
    result.pass = false;
    result.summary = std::string("FAIL: ") + e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SweepTable sweep_diffusion(const Scenario& base, std::span<const double> factors, double t_lo, double t_hi,
                           std::optional<std::uint64_t> seed_override) {
  SweepTable table;
  Scenario sc = with_seed(base, seed_override);
  sc.checks.clear();
  sc.params.clear();
  sc.snapshots.clear();
  std::optional<double> last_rate;
  for (double factor : factors) {
    if (!(factor > 0.0)) throw ConfigError("sweep factors must be positive");
    SimConfig cfg = make_sim_config(sc);
    for (double& d : cfg.diffusion) d *= factor;
    SweepRow row;
    row.factor = factor;
    Trajectory traj;
    try {
      traj = simulate(cfg);
    } catch (const NumericalError& e) {
      row.global = false;
      row.note = e.what();
      table.rows.push_back(row);
      continue;
    }
    row.global = !traj.blowup;
    for (const auto& s : traj.samples) row.sup_linf = std::max(row.sup_linf, max_linf(s));
    if (!row.global) {
      row.note = traj.halt_reason;
    } else {
      const auto dev = series_of(traj, [](const Diagnostics& d) { return d.deviation_linf; });
      // Stop the window where the series reaches the rounding plateau.
      const auto t = traj.times();
      double hi = t_hi;
      for (std::size_t k = 0; k < dev.size(); ++k)
        if (dev[k] < kSweepPlateau * dev.front()) {
          hi = std::min(hi, t[k]);
          break;
        }
      try {
        row.fit = fit_exponential(t, dev, t_lo, hi);
        if (last_rate && !(row.fit->rate > *last_rate)) table.rate_increasing = false;
        last_rate = row.fit->rate;
      } catch (const Error& e) {
        row.note = e.what();
      }
    }
    table.rows.push_back(row);
  }
  return table;
}

RegularityProvider empirical_regularity(const SpatialGrid& grid, std::size_t sources, double horizon, double dt,
                                        std::uint64_t seed) {
  return [grid, sources, horizon, dt, seed](double d, double p) {
    RegularityOptions opt;
    opt.diffusion = d;
    opt.p = p;
    opt.sources = sources;
    opt.horizon = horizon;
    opt.dt = dt;
    opt.seed = seed;
    return estimate_regularity_constant(grid, opt).c_hat;
  };
}

}  // namespace rdslab
