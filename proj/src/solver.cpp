#include "rdslab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rdslab/equilibria.hpp"
#include "rdslab/error.hpp"
#include "rdslab/kernels.hpp"

namespace rdslab {

namespace {

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

bool all_finite(const FieldState& state) {
  for (const Field& f : state.species)
    if (!std::isfinite(kernels::sum_abs(f))) return false;
  return true;
}

double field_min(const Field& f) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : f) m = std::min(m, v);
  return m;
}

double sup_norm(const FieldState& state) {
  double m = 0.0;
  for (const Field& f : state.species) m = std::max(m, kernels::max_abs(f));
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Cutoffs

double CutoffPsi::value(double t) const { return smoothstep(t - shift_); }

double CutoffPsi::derivative(double t) const {
  const double s = t - shift_;
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 6.0 * s * (1.0 - s);
}

CutoffPhi::CutoffPhi(double radius) : radius_(radius) {
  if (!(radius > 0.0)) throw Error("cutoff radius must be positive");
}

double CutoffPhi::value_at_norm(double norm) const {
  return 1.0 - smoothstep((norm - radius_) / radius_);
}

double CutoffPhi::value(std::span<const double> x) const {
  double s = 0.0;
  for (double v : x) s += v * v;
  return value_at_norm(std::sqrt(s));
}

// ---------------------------------------------------------------------------
// Initial data

FieldState make_initial_state(const InitialData& init, const SpatialGrid& grid, std::size_t species) {
  FieldState state;
  state.species.assign(species, Field(grid.node_count(), 0.0));
  const std::size_t n = grid.node_count();

  if (const auto* c = std::get_if<ConstantInit>(&init)) {
    if (c->values.size() != species) throw ConfigError("constant initial data needs one value per species");
    for (std::size_t i = 0; i < species; ++i) std::fill(state.species[i].begin(), state.species[i].end(), c->values[i]);
  } else if (const auto* b = std::get_if<BumpInit>(&init)) {
    if (b->base.size() != species || b->amplitude.size() != species)
      throw ConfigError("bump initial data needs base and amplitude per species");
    if (b->centers.size() != 1 && b->centers.size() != species)
      throw ConfigError("bump initial data needs one shared centre or one per species");
    if (!(b->width > 0.0)) throw ConfigError("bump width must be positive");
    Field bump(n);
    for (std::size_t i = 0; i < species; ++i) {
      const auto& centre = b->centers.size() == 1 ? b->centers[0] : b->centers[i];
      for (std::size_t x = 0; x < n; ++x) {
        const auto p = grid.position(x);
        const double dx = p[0] - centre[0];
        const double dy = grid.dim() == 2 ? p[1] - centre[1] : 0.0;
        bump[x] = std::exp(-(dx * dx + dy * dy) / (2.0 * b->width * b->width));
      }
      const double shift = b->zero_mean ? spatial_average(bump, grid) : 0.0;
      for (std::size_t x = 0; x < n; ++x)
        state.species[i][x] = b->base[i] + b->amplitude[i] * (bump[x] - shift);
    }
  } else {
    const auto& r = std::get<RandomInit>(init);
    if (!(r.hi >= r.lo)) throw ConfigError("random initial data needs lo <= hi");
    std::mt19937_64 rng(r.seed);
    std::uniform_real_distribution<double> dist(r.lo, r.hi);
    for (auto& f : state.species)
      for (double& v : f) v = dist(rng);
  }
  return state;
}

// ---------------------------------------------------------------------------
// Configuration

void SimConfig::validate() const {
  const std::size_t m = nonlinearity.species_count();
  if (diffusion.size() != m)
    throw ConfigError("diffusion vector has " + std::to_string(diffusion.size()) + " entries, network has " +
                      std::to_string(m) + " species");
  for (double d : diffusion)
    if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("diffusion coefficients must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be nonnegative");
  if (stride < 1) throw ConfigError("stride must be at least 1");
  if (truncation_radius && !(*truncation_radius > 0.0)) throw ConfigError("truncation radius must be positive");
  if (!z0.empty() && z0.size() != m) throw ConfigError("z0 needs one entry per species");
  if (equilibrium) {
    if (equilibrium->size() != m) throw ConfigError("equilibrium needs one entry per species");
    for (double v : *equilibrium)
      if (!(v > 0.0)) throw ConfigError("entropy diagnostics need a positive equilibrium");
  }
  if (max_halvings < 0) throw ConfigError("max_halvings must be nonnegative");
  if (!(blowup_ceiling > 0.0)) throw ConfigError("blow-up ceiling must be positive");
}

double SimConfig::rescale_factor() const {
  if (!rescale) return 1.0;
  return 1.0 / *std::min_element(diffusion.begin(), diffusion.end());
}

std::vector<double> SimConfig::effective_diffusion() const {
  std::vector<double> d = diffusion;
  const double a = rescale_factor();
  for (double& v : d) v *= a;
  return d;
}

// ---------------------------------------------------------------------------
// Diagnostics

Diagnostics diagnose(const FieldState& state, const SimConfig& config) {
  const SpatialGrid& grid = config.grid;
  const std::size_t m = state.species.size();
  const double w = grid.cell_volume();
  Diagnostics d;
  d.t = state.time;
  d.l1.resize(m);
  d.l2.resize(m);
  d.linf.resize(m);
  d.average.resize(m);

  Field total(grid.node_count(), 0.0);
  Field scratch(grid.node_count());
  for (std::size_t i = 0; i < m; ++i) {
    const Field& u = state.species[i];
    d.l1[i] = lp_norm(u, grid, 1.0);
    d.l2[i] = lp_norm(u, grid, 2.0);
    d.linf[i] = lp_norm(u, grid, kInfNorm);
    d.average[i] = spatial_average(u, grid);
    d.total_mass += integral(u, grid);
    kernels::axpy(1.0, u, total);

    for (std::size_t x = 0; x < u.size(); ++x) scratch[x] = u[x] - d.average[i];
    d.deviation_linf += kernels::max_abs(scratch);
    d.deviation_l2sq += kernels::sum_sq(scratch) * w;

    const double z = config.shift(i);
    for (std::size_t x = 0; x < u.size(); ++x) scratch[x] = u[x] - z;
    d.shifted_linf = std::max(d.shifted_linf, kernels::max_abs(scratch));
  }
  d.sum_linf = kernels::max_abs(total);
  if (config.equilibrium) d.entropy = relative_entropy(state, grid, *config.equilibrium);

  if (const auto& hint = config.nonlinearity.lyapunov_hint()) {
    double v = 0.0;
    for (std::size_t i = 0; i < m && i < hint->terms.size(); ++i) {
      v += hint->terms[i] == LyapunovTerm::HalfSquare ? 0.5 * kernels::sum_sq(state.species[i]) * w
                                                      : kernels::sum_abs(state.species[i]) * w;
    }
    d.lyapunov = v;
  }
  return d;
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(s.t);
  return t;
}

// ---------------------------------------------------------------------------
// IMEX stepping

ImexStepper::ImexStepper(const SimConfig& config)
    : config_(config),
      diffusion_(config.effective_diffusion()),
      rate_scale_(config.rescale_factor()),
      check_positivity_(config.nonlinearity.is_mass_action()) {
  config.validate();
  operators_.resize(static_cast<std::size_t>(config.max_halvings) + 1);
  for (auto& level : operators_) level.resize(diffusion_.size());
}

const ImplicitDiffusion& ImexStepper::diffusion_operator(std::size_t species, int depth) {
  auto& slot = operators_[static_cast<std::size_t>(depth)][species];
  if (!slot) slot.emplace(config_.grid, diffusion_[species], std::ldexp(config_.dt, -depth));
  return *slot;
}

void ImexStepper::reaction(const FieldState& state, std::vector<Field>& out) const {
  config_.nonlinearity.evaluate_fields(state.species, out);
  const std::size_t m = state.species.size();
  const std::size_t n = config_.grid.node_count();
  if (config_.truncation_radius) {
    const CutoffPhi phi(*config_.truncation_radius);
    for (std::size_t x = 0; x < n; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double v = state.species[i][x] - config_.shift(i);
        s += v * v;
      }
      const double c = phi.value_at_norm(std::sqrt(s));
      if (c != 1.0)
        for (std::size_t i = 0; i < m; ++i) out[i][x] *= c;
    }
  }
  if (rate_scale_ != 1.0)
    for (auto& f : out)
      for (double& v : f) v *= rate_scale_;
}

ImexStepper::Status ImexStepper::advance(FieldState& state, double h, int depth) {
  std::vector<Field> rate;
  reaction(state, rate);
  FieldState trial = state;
  for (std::size_t i = 0; i < trial.species.size(); ++i) {
    kernels::axpy(h, rate[i], trial.species[i]);
    diffusion_operator(i, depth).solve(trial.species[i], trial.species[i]);
  }
  if (!all_finite(trial)) return Status::NonFinite;

  if (check_positivity_) {
    bool negative = false;
    for (const Field& f : trial.species)
      if (field_min(f) < -config_.positivity_tolerance) negative = true;
    if (negative) {
      if (depth >= config_.max_halvings)
        throw NumericalError("positivity failure: step size underflow after " +
                             std::to_string(config_.max_halvings) + " halvings at t = " +
                             std::to_string(state.time));
      ++halvings_;
      if (advance(state, 0.5 * h, depth + 1) == Status::NonFinite) return Status::NonFinite;
      return advance(state, 0.5 * h, depth + 1);
    }
  }
  trial.time = state.time + h;
  state = std::move(trial);
  return Status::Ok;
}

ImexStepper::Status ImexStepper::step(FieldState& state) { return advance(state, config_.dt, 0); }

FieldState step_imex(const FieldState& state, const SimConfig& config) {
  ImexStepper stepper(config);
  FieldState next = state;
  if (stepper.step(next) == ImexStepper::Status::NonFinite)
    throw NumericalError("non-finite state after IMEX step");
  return next;
}

Trajectory simulate(const SimConfig& config) {
  config.validate();
  Trajectory traj;
  traj.species = config.nonlinearity.species();
  traj.dt = config.dt;
  traj.stride = config.stride;

  FieldState state = make_initial_state(config.initial, config.grid, config.nonlinearity.species_count());
  state.time = 0.0;
  auto record = [&] {
    traj.samples.push_back(diagnose(state, config));
    if (config.store_fields) traj.fields.push_back(state);
  };
  if (!all_finite(state)) throw ConfigError("initial data is not finite");
  record();

  ImexStepper stepper(config);
  const auto steps = static_cast<std::size_t>(std::llround(config.t_end / config.dt));
  for (std::size_t n = 1; n <= steps; ++n) {
    const auto status = stepper.step(state);
    state.time = static_cast<double>(n) * config.dt;
    if (status == ImexStepper::Status::NonFinite) {
      traj.blowup = true;
      traj.halt_reason = "non-finite state at t = " + std::to_string(state.time);
      break;
    }
    ++traj.steps;
    if (sup_norm(state) > config.blowup_ceiling) {
      traj.blowup = true;
      traj.halt_reason = "sup norm exceeded ceiling at t = " + std::to_string(state.time);
      record();
      break;
    }
    if (n % config.stride == 0 || n == steps) record();
  }
  traj.halvings = stepper.halvings();
  traj.final_state = std::move(state);
  return traj;
}

// ---------------------------------------------------------------------------
// ODE

namespace {

using Vec = std::vector<double>;

Vec rk4_step(const Nonlinearity& f, const Vec& v, double h) {
  const std::size_t m = v.size();
  Vec k1 = f.evaluate(v), tmp(m);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = v[i] + 0.5 * h * k1[i];
  Vec k2 = f.evaluate(tmp);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = v[i] + 0.5 * h * k2[i];
  Vec k3 = f.evaluate(tmp);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = v[i] + h * k3[i];
  Vec k4 = f.evaluate(tmp);
  Vec out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = v[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

void ode_advance(const Nonlinearity& f, Vec& v, double h, int depth) {
  Vec next = rk4_step(f, v, h);
  for (double x : next)
    if (!std::isfinite(x)) throw NumericalError("non-finite ODE state");
  if (f.is_mass_action() && *std::min_element(next.begin(), next.end()) < -1e-12) {
    if (depth >= 20) throw NumericalError("positivity failure in ODE integration");
    ode_advance(f, v, 0.5 * h, depth + 1);
    ode_advance(f, v, 0.5 * h, depth + 1);
    return;
  }
  v = std::move(next);
}

}  // namespace

OdeTrajectory simulate_ode(const Nonlinearity& f, std::span<const double> v0, double dt, double t_end,
                           std::size_t stride) {
  if (v0.size() != f.species_count()) throw Error("ODE initial state dimension mismatch");
  if (!(dt > 0.0) || !(t_end >= 0.0) || stride < 1) throw Error("ODE integration needs dt > 0, t_end >= 0");
  if (f.is_mass_action())
    for (double x : v0)
      if (x < 0.0) throw Error("mass-action ODE needs a nonnegative initial state");

  OdeTrajectory traj;
  Vec v(v0.begin(), v0.end());
  traj.times.push_back(0.0);
  traj.states.push_back(v);
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  for (std::size_t n = 1; n <= steps; ++n) {
    ode_advance(f, v, dt, 0);
    if (n % stride == 0 || n == steps) {
      traj.times.push_back(static_cast<double>(n) * dt);
      traj.states.push_back(v);
    }
  }
  return traj;
}

std::vector<std::vector<double>> averaged_residual(const Trajectory& trajectory, const Nonlinearity& f,
                                                   const SpatialGrid& grid) {
  if (!trajectory.has_fields()) throw Error("averaged residual needs a trajectory with stored fields");
  const std::size_t m = f.species_count();
  std::vector<std::vector<double>> g;
  g.reserve(trajectory.fields.size());
  std::vector<Field> values;
  for (const FieldState& state : trajectory.fields) {
    f.evaluate_fields(state.species, values);
    std::vector<double> mean(m), gi(m);
    for (std::size_t i = 0; i < m; ++i) mean[i] = spatial_average(state.species[i], grid);
    const std::vector<double> at_mean = f.evaluate(mean);
    for (std::size_t i = 0; i < m; ++i) gi[i] = spatial_average(values[i], grid) - at_mean[i];
    g.push_back(std::move(gi));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Lipschitz sampling

namespace {

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

LipschitzEstimate lipschitz_estimate(const Nonlinearity& f, const CutoffPhi& cutoff, std::size_t samples,
                                     std::uint64_t seed, std::span<const double> z0) {
  const std::size_t m = f.species_count();
  if (!z0.empty() && z0.size() != m) throw Error("z0 dimension mismatch");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double outer = 2.0 * cutoff.radius();

  Vec shifted(m);
  auto truncated = [&](const Vec& v) {
    for (std::size_t i = 0; i < m; ++i) shifted[i] = v[i] + (z0.empty() ? 0.0 : z0[i]);
    Vec out = f.evaluate(shifted);
    const double c = cutoff.value(v);
    for (double& x : out) x *= c;
    return out;
  };
  auto sample_ball = [&] {
    Vec v(m);
    double norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    const double radius = outer * std::pow(unit(rng), 1.0 / static_cast<double>(m));
    for (double& x : v) x *= radius / norm;
    return v;
  };

  LipschitzEstimate est;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec v = sample_ball();
    const Vec fv = truncated(v);
    const double nv = sup_abs(v);
    if (nv > 0.0) est.growth = std::max(est.growth, sup_abs(fv) / nv);

    Vec w(m);
    if (s % 2 == 0) {
      for (std::size_t i = 0; i < m; ++i) w[i] = v[i] + 1e-6 * cutoff.radius() * normal(rng);
    } else {
      w = sample_ball();
    }
    const Vec fw = truncated(w);
    Vec dv(m), df(m);
    for (std::size_t i = 0; i < m; ++i) {
      dv[i] = v[i] - w[i];
      df[i] = fv[i] - fw[i];
    }
    const double ndv = sup_abs(dv);
    if (ndv > 0.0) est.pairwise = std::max(est.pairwise, sup_abs(df) / ndv);
    ++est.samples;
  }
  return est;
}

double lipschitz_on_box(const Nonlinearity& f, std::span<const double> lo, std::span<const double> hi,
                        std::size_t samples, std::uint64_t seed) {
  const std::size_t m = f.species_count();
  if (lo.size() != m || hi.size() != m) throw Error("box dimension mismatch");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&] {
    Vec v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
    return v;
  };
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec v = draw();
    Vec w;
    if (s % 2 == 0) {
      w = v;
      for (std::size_t i = 0; i < m; ++i)
        w[i] = std::clamp(v[i] + 1e-6 * (hi[i] - lo[i] + 1.0) * normal(rng), lo[i], hi[i]);
    } else {
      w = draw();
    }
    const Vec fv = f.evaluate(v), fw = f.evaluate(w);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      num = std::max(num, std::abs(fv[i] - fw[i]));
      den = std::max(den, std::abs(v[i] - w[i]));
    }
    if (den > 0.0) best = std::max(best, num / den);
  }
  return best;
}

}  // namespace rdslab
