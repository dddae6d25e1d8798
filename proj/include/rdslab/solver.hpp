#pragma once

// Time integration of reaction-diffusion systems
//
//   d_t u_i - d_i lap u_i = F_i(u),   Neumann boundary,
//
// with F = f, or the truncated F = Phi_r(u - z0) f(u), optionally rescaled in
// time (v(x, t) = u(x, a t), a = 1 / d_min). The step is IMEX: explicit Euler
// for the reaction, backward Euler per species for the diffusion. Mass-action
// runs reject steps that leave the nonnegative orthant and retry with halved
// substeps.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rdslab/grid.hpp"
#include "rdslab/network.hpp"

namespace rdslab {

// Smooth switch-on psi_tau(t) = psi(t - tau), psi(s) = 3s^2 - 2s^3 on [0, 1].
class CutoffPsi {
 public:
  explicit CutoffPsi(double shift = 0.0) : shift_(shift) {}
  double value(double t) const;
  double derivative(double t) const;
  double shift() const noexcept { return shift_; }

 private:
  double shift_;
};

// Radial cutoff: 1 on |x| <= r, 0 on |x| >= 2r, cubic smoothstep in between.
class CutoffPhi {
 public:
  explicit CutoffPhi(double radius);
  double value(std::span<const double> x) const;
  double value_at_norm(double norm) const;
  double radius() const noexcept { return radius_; }
  // sup |grad Phi_r| = 1.5 / r
  double gradient_bound() const noexcept { return 1.5 / radius_; }

 private:
  double radius_;
};

struct ConstantInit {
  std::vector<double> values;
};

// u_i(x) = base_i + amplitude_i exp(-|x - center_i|^2 / (2 width^2)). With
// zero_mean the bump's grid average is subtracted so that avg u_i = base_i.
struct BumpInit {
  std::vector<double> base;
  std::vector<double> amplitude;
  std::vector<std::array<double, 2>> centers;  // one per species, or one shared
  double width = 0.1;
  bool zero_mean = false;
};

struct RandomInit {
  double lo = 0.0;
  double hi = 1.0;
  std::uint64_t seed = 0;
};

using InitialData = std::variant<ConstantInit, BumpInit, RandomInit>;

FieldState make_initial_state(const InitialData& init, const SpatialGrid& grid, std::size_t species);

struct SimConfig {
  SimConfig(Nonlinearity f, SpatialGrid g, std::vector<double> d, InitialData init)
      : nonlinearity(std::move(f)), grid(std::move(g)), diffusion(std::move(d)), initial(std::move(init)) {}

  Nonlinearity nonlinearity;
  SpatialGrid grid;
  std::vector<double> diffusion;
  InitialData initial;
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t stride = 1;
  std::optional<double> truncation_radius;
  bool rescale = false;
  std::vector<double> z0;                          // empty: no shift
  std::optional<std::vector<double>> equilibrium;  // enables the entropy diagnostic
  bool store_fields = false;
  double blowup_ceiling = 1e8;
  double positivity_tolerance = 1e-12;
  int max_halvings = 20;

  // Throws ConfigError.
  void validate() const;
  // a = 1 / d_min under the rescale flag, otherwise 1.
  double rescale_factor() const;
  // a * d_i under the rescale flag, otherwise d_i.
  std::vector<double> effective_diffusion() const;
  double shift(std::size_t species) const { return z0.empty() ? 0.0 : z0[species]; }
};

struct Diagnostics {
  double t = 0.0;
  std::vector<double> l1, l2, linf, average;
  double total_mass = 0.0;          // sum_i int u_i
  std::optional<double> entropy;    // relative entropy to the configured equilibrium
  double sum_linf = 0.0;            // |sum_i u_i|_inf
  double deviation_linf = 0.0;      // sum_i |u_i - avg u_i|_inf
  double deviation_l2sq = 0.0;      // sum_i |u_i - avg u_i|_2^2
  double shifted_linf = 0.0;        // max_i |u_i - z0_i|_inf
  std::optional<double> lyapunov;   // declared Lyapunov hint of a builtin
};

Diagnostics diagnose(const FieldState& state, const SimConfig& config);

struct Trajectory {
  std::vector<std::string> species;
  std::vector<Diagnostics> samples;
  std::vector<FieldState> fields;  // parallel to samples when stored
  FieldState final_state;          // state after the last accepted step
  bool blowup = false;
  std::string halt_reason;
  std::size_t steps = 0;
  std::size_t halvings = 0;
  double dt = 0.0;
  std::size_t stride = 1;

  std::vector<double> times() const;
  bool has_fields() const noexcept { return !fields.empty() && fields.size() == samples.size(); }
};

class ImexStepper {
 public:
  explicit ImexStepper(const SimConfig& config);

  enum class Status { Ok, NonFinite };

  // Advances by config.dt. Throws NumericalError when positivity cannot be
  // restored within max_halvings.
  Status step(FieldState& state);
  std::size_t halvings() const noexcept { return halvings_; }

  // F(u) at every node: truncated, shifted and rescaled as configured.
  void reaction(const FieldState& state, std::vector<Field>& out) const;

 private:
  Status advance(FieldState& state, double h, int depth);
  const ImplicitDiffusion& diffusion_operator(std::size_t species, int depth);

  const SimConfig& config_;
  std::vector<double> diffusion_;
  double rate_scale_ = 1.0;
  bool check_positivity_ = false;
  std::vector<std::vector<std::optional<ImplicitDiffusion>>> operators_;  // [depth][species]
  std::size_t halvings_ = 0;
};

FieldState step_imex(const FieldState& state, const SimConfig& config);

Trajectory simulate(const SimConfig& config);

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
};

// Classical RK4 for d_t v = f(v) with the same positivity retry policy.
OdeTrajectory simulate_ode(const Nonlinearity& f, std::span<const double> v0, double dt, double t_end,
                           std::size_t stride = 1);

// g_i(t) = avg f_i(u(., t)) - f_i(avg u(., t)) per stored sample.
// Throws Error for trajectories without stored fields.
std::vector<std::vector<double>> averaged_residual(const Trajectory& trajectory, const Nonlinearity& f,
                                                   const SpatialGrid& grid);

struct LipschitzEstimate {
  double growth = 0.0;    // max |F(v)|_inf / |v|_inf, the constant in |F(v)| <= L_r |v|
  double pairwise = 0.0;  // max |F(v) - F(w)|_inf / |v - w|_inf over sampled pairs
  std::size_t samples = 0;
  double value() const noexcept { return growth; }
};

// Sampled lower estimate of L_r for F(v) = Phi_r(v) f(v + z0) on the ball |v| <= 2r.
LipschitzEstimate lipschitz_estimate(const Nonlinearity& f, const CutoffPhi& cutoff, std::size_t samples,
                                     std::uint64_t seed = 11, std::span<const double> z0 = {});

// Sampled pairwise Lipschitz constant of f on the box [lo, hi] (sup norms).
double lipschitz_on_box(const Nonlinearity& f, std::span<const double> lo, std::span<const double> hi,
                        std::size_t samples, std::uint64_t seed = 13);

}  // namespace rdslab
