#include "rdslab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rdslab/error.hpp"

namespace rdslab {

double BootstrapSchedule::q_at(int k) const {
  if (k == 0) return 1.0;
  return q.at(static_cast<std::size_t>(k - 1));
}

BootstrapSchedule bootstrap_schedule(int n, double mu, std::optional<double> p0) {
  if (n < 1) throw Error("bootstrap schedule needs n >= 1");
  if (!(mu >= 1.0)) throw Error("bootstrap schedule needs mu >= 1");
  BootstrapSchedule s;
  s.n = n;
  s.mu = mu;
  const double nn = n;
  s.threshold = (mu - 1.0) * (nn + 2.0) / 2.0;

  const double ratio = (nn + 2.0) / (nn + 1.0);
  double qk = 1.0;
  while (!(qk > s.threshold)) {
    qk *= ratio;
    s.q.push_back(qk);
    ++s.K;
  }

  const double start = p0.value_or(qk);
  if (!(start > s.threshold))
    throw Error("p0 = " + std::to_string(start) + " must exceed (mu-1)(n+2)/2 = " + std::to_string(s.threshold));
  s.p.push_back(start);
  const double target = (nn + 2.0) / 2.0;
  while (!(s.p.back() / mu > target)) {
    const double r = s.p.back() / mu;
    const double denom = nn + 2.0 - 2.0 * r;
    if (s.p.size() > 100000) break;
    // p_k / mu = (n+2)/2 exactly: the next step already embeds into L^inf.
    s.p.push_back(denom > 0.0 ? (nn + 2.0) * r / denom : std::numeric_limits<double>::infinity());
  }
  s.k0 = static_cast<int>(s.p.size()) - 1;
  return s;
}

std::vector<InequalityInstance> schedule_exponent_inequalities(const BootstrapSchedule& schedule) {
  std::vector<InequalityInstance> out;
  const double nn = schedule.n;
  auto conjugate = [](double q) { return q / (q - 1.0); };
  for (int k = 1; k <= schedule.K; ++k) {
    const double lhs = std::pow(nn + 1.0, k);
    const double rhs = 2.0 * std::pow(nn + 2.0, k);
    out.push_back({"(n+1)^k < 2(n+2)^k, k=" + std::to_string(k), lhs, rhs, lhs < rhs});
    if (k == schedule.K) break;
    const double qt_k = conjugate(schedule.q_at(k));
    const double qt_next = conjugate(schedule.q_at(k + 1));
    const double denom = nn + 2.0 - 2.0 * qt_next;
    const double step = denom > 0.0 ? (nn + 2.0) * qt_next / denom : std::numeric_limits<double>::infinity();
    out.push_back({"conjugate exponent step k=" + std::to_string(k), qt_k, step, qt_k < step});
  }
  return out;
}

LargeDiffusionExponent large_diffusion_K(int n) {
  if (n < 1) throw Error("large_diffusion_K needs n >= 1");
  const double nn = n;
  const double target = (nn + 2.0) / 2.0;
  int K = 0;
  double lhs = 2.0;
  while (!(lhs > target)) {
    lhs *= (nn + 2.0) / nn;
    ++K;
  }
  return {K, K + 2};
}

QuasiUniformReport quasi_uniform_condition(std::span<const double> diffusion, int n, double mu,
                                           const RegularityProvider& provider) {
  if (diffusion.empty()) throw Error("quasi-uniform condition needs a diffusion vector");
  QuasiUniformReport rep;
  rep.d_max = *std::max_element(diffusion.begin(), diffusion.end());
  rep.d_min = *std::min_element(diffusion.begin(), diffusion.end());
  rep.d_mid = 0.5 * (rep.d_max + rep.d_min);
  const BootstrapSchedule sched = bootstrap_schedule(n, mu);
  rep.K = sched.K;
  rep.vacuous = sched.K == 0;
  rep.pass = true;
  const double spread = 0.5 * (rep.d_max - rep.d_min);
  for (int k = 1; k <= sched.K; ++k) {
    const double qk = sched.q_at(k);
    const double conj = qk / (qk - 1.0);
    const double lhs = spread == 0.0 ? 0.0 : spread * provider(rep.d_mid, conj);
    InequalityInstance inst{"(d_max-d_min)/2 * C(d, " + std::to_string(conj) + ") < 1, k=" + std::to_string(k),
                            lhs, 1.0, lhs < 1.0};
    rep.pass = rep.pass && inst.holds;
    rep.instances.push_back(std::move(inst));
  }
  return rep;
}

double young_bound(double a, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error("young_bound needs eps in (0,1)");
  if (!(a >= 0.0)) throw Error("young_bound needs A >= 0");
  if (a == 0.0) return 0.0;
  const double inv = 1.0 / (1.0 - eps);
  return 2.0 * (1.0 - eps) * std::pow(2.0 * eps, eps * inv) * std::pow(a, inv);
}

double gronwall_ceiling(double m, double a, double lipschitz, int K) {
  if (m < 0.0 || a < 0.0 || lipschitz < 0.0 || K < 0) throw Error("gronwall_ceiling needs nonnegative arguments");
  return m * std::exp(a * lipschitz * (K + 1.0));
}

BmBound b_m_bound(double m, double l_m, double eps, double c_embed, int K) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error("b_m_bound needs eps in (0,1)");
  if (m < 0.0 || l_m < 0.0 || c_embed < 0.0 || K < 0) throw Error("b_m_bound needs nonnegative arguments");
  BmBound b;
  const double inv = 1.0 / (1.0 - eps);
  b.embedding_branch = c_embed * std::pow(3.0, inv) * std::pow(l_m, 0.5 * inv);
  b.gronwall_branch = std::exp(K + 1.0) * m;
  b.value = std::max(b.embedding_branch, b.gronwall_branch);
  return b;
}

DecayFit fit_exponential(std::span<const double> t, std::span<const double> y, double t_lo, double t_hi) {
  if (t.size() != y.size()) throw Error("fit_exponential: series lengths differ");
  std::vector<double> xs, ls;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(y[i] > kDecayFloor) || !std::isfinite(y[i])) continue;
    xs.push_back(t[i]);
    ls.push_back(std::log(y[i]));
  }
  if (xs.size() < 5)
    throw Error("fit_exponential: " + std::to_string(xs.size()) + " usable samples in [" + std::to_string(t_lo) +
                ", " + std::to_string(t_hi) + "], need at least 5");

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ls[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ls[i] - my);
    syy += (ls[i] - my) * (ls[i] - my);
  }
  if (sxx == 0.0) throw Error("fit_exponential: samples share a single time");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ls[i] - (intercept + slope * xs[i]);
    ss_res += r * r;
  }

  DecayFit fit;
  fit.amplitude = std::exp(intercept);
  fit.rate = -slope;
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.used = xs.size();
  return fit;
}

UniformBoundReport uniform_bound_report(const Trajectory& trajectory) {
  UniformBoundReport rep;
  rep.global = !trajectory.blowup;
  const auto& s = trajectory.samples;
  if (s.empty()) return rep;
  const std::size_t m = s.front().linf.size();
  rep.sup_linf.assign(m, 0.0);
  rep.sup_l1.assign(m, 0.0);
  std::vector<double> series;
  for (const Diagnostics& d : s) {
    double top = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      rep.sup_linf[i] = std::max(rep.sup_linf[i], d.linf[i]);
      rep.sup_l1[i] = std::max(rep.sup_l1[i], d.l1[i]);
      top = std::max(top, d.linf[i]);
    }
    series.push_back(top);
  }

  const std::size_t n = series.size();
  if (n >= 3) {
    const auto middle = std::max_element(series.begin() + static_cast<std::ptrdiff_t>(n / 3),
                                         series.begin() + static_cast<std::ptrdiff_t>(2 * n / 3));
    const auto last = std::max_element(series.begin() + static_cast<std::ptrdiff_t>(2 * n / 3), series.end());
    if (*middle > 0.0) {
      rep.tail_ratio = *last / *middle;
    } else {
      rep.tail_ratio = *last > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
  }
  rep.flat = rep.tail_ratio <= kTailTolerance;

  const double m0 = s.front().total_mass;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double inc = s[k].total_mass - s[k - 1].total_mass;
    rep.max_mass_increase = std::max(rep.max_mass_increase, inc);
    const double drift = std::abs(s[k].total_mass - m0) / std::max(std::abs(m0), 1e-300);
    rep.max_mass_drift = std::max(rep.max_mass_drift, drift);
  }
  rep.mass_nonincreasing = rep.max_mass_increase <= 1e-10 * static_cast<double>(trajectory.stride);
  rep.mass_constant = rep.max_mass_drift <= 1e-10;
  return rep;
}

double poincare_gap(double d_min, double c_omega, double c_m) {
  if (d_min < 0.0 || c_omega < 0.0 || c_m < 0.0) throw Error("poincare_gap needs nonnegative arguments");
  return 2.0 * d_min * c_omega - c_m;
}

}  // namespace rdslab
