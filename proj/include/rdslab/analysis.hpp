#pragma once

// Exponent arithmetic, closed-form bounds and decay fits used to check the
// quantitative claims on simulated trajectories.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdslab/solver.hpp"

namespace rdslab {

// A single evaluated inequality lhs < rhs (or <=, as labelled).
struct InequalityInstance {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct BootstrapSchedule {
  int n = 1;
  double mu = 1.0;
  double threshold = 0.0;  // (mu - 1)(n + 2) / 2
  int K = 0;
  std::vector<double> q;   // q_1 .. q_K, q_k = ((n+2)/(n+1))^k
  int k0 = 0;
  std::vector<double> p;   // p_0 .. p_k0; p_k0 may be +inf

  int J() const noexcept { return K + 1; }
  int L() const noexcept { return K + 2; }
  double q_at(int k) const;  // q_0 = 1
};

// Throws Error if n < 1, mu < 1 or p0 <= threshold. p0 defaults to q_K.
BootstrapSchedule bootstrap_schedule(int n, double mu, std::optional<double> p0 = std::nullopt);

// (n+1)^k < 2 (n+2)^k for k = 1..K, and its unreduced form
// q~_k < (n+2) q~_{k+1} / (n+2 - 2 q~_{k+1}) for k = 1..K-1, with the right side
// read as +inf once q~_{k+1} >= (n+2)/2 (the embedding then reaches L^inf).
std::vector<InequalityInstance> schedule_exponent_inequalities(const BootstrapSchedule& schedule);

struct LargeDiffusionExponent {
  int K = 0;
  int L = 2;
};

// Smallest K >= 0 with 2((n+2)/n)^K > (n+2)/2.
LargeDiffusionExponent large_diffusion_K(int n);

struct QuasiUniformReport {
  double d_max = 0.0, d_min = 0.0, d_mid = 0.0;
  int K = 0;
  std::vector<InequalityInstance> instances;  // one per k = 1..K
  bool pass = false;
  bool vacuous = false;  // K = 0
};

using RegularityProvider = std::function<double(double d, double p)>;

// (d_max - d_min)/2 * C_{d, q~_k} < 1 for k = 1..K, d = (d_max + d_min)/2.
QuasiUniformReport quasi_uniform_condition(std::span<const double> diffusion, int n, double mu,
                                           const RegularityProvider& provider);

// X <= A X^eps with eps in (0,1) implies X <= young_bound(A, eps).
double young_bound(double a, double eps);

// M exp(a L_r (K + 1))
double gronwall_ceiling(double m, double a, double lipschitz, int K);

struct BmBound {
  double value = 0.0;
  double embedding_branch = 0.0;  // C 3^{1/(1-eps)} L_M^{1/(2(1-eps))}
  double gronwall_branch = 0.0;   // e^{K+1} M
  std::string provenance = "embedding constant supplied by caller";
};

BmBound b_m_bound(double m, double l_m, double eps, double c_embed, int K);

struct DecayFit {
  double amplitude = 0.0;  // C
  double rate = 0.0;       // lambda
  double r2 = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  std::size_t used = 0;
};

inline constexpr double kDecayFloor = 1e-14;

// Least squares of log y against t over samples with t in [t_lo, t_hi] and
// y > kDecayFloor. Throws Error with fewer than 5 usable samples.
DecayFit fit_exponential(std::span<const double> t, std::span<const double> y, double t_lo, double t_hi);

struct UniformBoundReport {
  bool global = true;
  std::vector<double> sup_linf, sup_l1;  // per species
  double tail_ratio = 1.0;  // sup over last third / sup over middle third of max_i |u_i|_inf
  bool flat = true;         // tail_ratio <= kTailTolerance
  bool mass_nonincreasing = true;
  bool mass_constant = true;
  double max_mass_increase = 0.0;
  double max_mass_drift = 0.0;  // relative to the initial mass
};

inline constexpr double kTailTolerance = 1.05;

UniformBoundReport uniform_bound_report(const Trajectory& trajectory);

// delta = 2 d_min C_Omega - C_M. Throws Error for negative inputs.
double poincare_gap(double d_min, double c_omega, double c_m);

}  // namespace rdslab
