#include "rdslab/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "rdslab/error.hpp"

namespace rdslab {

namespace {

constexpr double kNegativeSlack = 1e-12;

double entropy_density(double u, double u_inf) {
  if (u < 0.0) {
    if (u < -kNegativeSlack) throw Error("relative entropy of a negative state");
    u = 0.0;
  }
  if (u == 0.0) return u_inf;
  return u * std::log(u / u_inf) - u + u_inf;
}

void require_positive_reference(std::span<const double> u_inf) {
  for (double v : u_inf)
    if (!(v > 0.0)) throw Error("relative entropy needs a positive reference state");
}

std::vector<double> conserved_of(const ReactionNetwork& network, std::span<const double> u) {
  const Eigen::MatrixXd w = conservation_laws(network);
  const Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<Eigen::Index>(u.size()));
  const Eigen::VectorXd c = w * uv;
  return {c.data(), c.data() + c.size()};
}

EquilibriumSolution make_solution(const ReactionNetwork& network, std::vector<double> u) {
  EquilibriumSolution sol;
  sol.conserved = conserved_of(network, u);
  sol.kind = *std::min_element(u.begin(), u.end()) > 0.0 ? EquilibriumKind::Positive
                                                          : EquilibriumKind::Boundary;
  sol.u_inf = std::move(u);
  return sol;
}

// The line u0 + s v through the class of a single reversible pair.
struct ReversibleLine {
  std::vector<double> alpha, beta, u0, v;
  double kf = 0.0, kb = 0.0;
  double s_lo = -std::numeric_limits<double>::infinity();
  double s_hi = std::numeric_limits<double>::infinity();
  std::size_t lo_index = 0, hi_index = 0;

  std::vector<double> at(double s) const {
    std::vector<double> u(u0.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = u0[i] + s * v[i];
    return u;
  }

  // Endpoint with the active constraint set exactly to zero.
  std::vector<double> endpoint(bool upper) const {
    std::vector<double> u = at(upper ? s_hi : s_lo);
    u[upper ? hi_index : lo_index] = 0.0;
    for (double& x : u) x = std::max(x, 0.0);
    return u;
  }

  // log(kf u^alpha) - log(kb u^beta), strictly decreasing in s.
  double log_flow_gap(const std::vector<double>& u) const {
    double g = std::log(kf) - std::log(kb);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double c = alpha[i] - beta[i];
      if (c == 0.0) continue;
      g += c * std::log(u[i]);  // log 0 = -inf gives the correct infinite limit
    }
    return g;
  }
};

ReversibleLine reversible_line(const ReactionNetwork& network, std::span<const double> u0) {
  if (!is_single_reversible_pair(network))
    throw Error("network is not a single reversible reaction pair");
  if (u0.size() != network.species_count()) throw Error("initial state dimension does not match network");
  const Reaction& fwd = network.reactions()[0];
  const Reaction& bwd = network.reactions()[1];
  ReversibleLine line;
  line.alpha = fwd.reactants;
  line.beta = fwd.products;
  line.kf = fwd.rate;
  line.kb = bwd.rate;
  line.u0.assign(u0.begin(), u0.end());
  line.v.resize(u0.size());
  for (std::size_t i = 0; i < u0.size(); ++i) {
    if (u0[i] < 0.0) throw Error("initial state must be nonnegative");
    line.v[i] = line.beta[i] - line.alpha[i];
    if (line.v[i] > 0.0) {
      const double bound = -u0[i] / line.v[i];
      if (bound > line.s_lo) {
        line.s_lo = bound;
        line.lo_index = i;
      }
    } else if (line.v[i] < 0.0) {
      const double bound = -u0[i] / line.v[i];
      if (bound < line.s_hi) {
        line.s_hi = bound;
        line.hi_index = i;
      }
    }
  }
  return line;
}

double max_flow(const ReactionNetwork& network, std::span<const double> u) {
  double m = 0.0;
  for (const Reaction& rx : network.reactions()) m = std::max(m, rx.rate * monomial(u, rx.reactants));
  return m;
}

void verify_equilibrium(const ReactionNetwork& network, const std::vector<double>& u) {
  const Nonlinearity f = Nonlinearity::mass_action(network);
  const std::vector<double> value = f.evaluate(u);
  double residual = 0.0;
  for (double v : value) residual = std::max(residual, std::abs(v));
  if (residual > 1e-10 * (1.0 + max_flow(network, u)))
    throw NumericalError("equilibrium residual |f(u_inf)| = " + std::to_string(residual) + " too large");
}

}  // namespace

double relative_entropy(std::span<const double> u, std::span<const double> u_inf) {
  if (u.size() != u_inf.size()) throw Error("relative entropy dimension mismatch");
  require_positive_reference(u_inf);
  double e = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) e += entropy_density(u[i], u_inf[i]);
  return e;
}

double relative_entropy(const FieldState& field, const SpatialGrid& grid, std::span<const double> u_inf) {
  if (field.species.size() != u_inf.size()) throw Error("relative entropy dimension mismatch");
  require_positive_reference(u_inf);
  double e = 0.0;
  for (std::size_t i = 0; i < u_inf.size(); ++i) {
    const Field& ui = field.species[i];
    if (ui.size() != grid.node_count()) throw Error("field size does not match grid");
    double s = 0.0;
    for (double v : ui) s += entropy_density(v, u_inf[i]);
    e += s;
  }
  return e * grid.cell_volume();
}

bool is_single_reversible_pair(const ReactionNetwork& network) {
  if (network.reaction_count() != 2) return false;
  const Reaction& a = network.reactions()[0];
  const Reaction& b = network.reactions()[1];
  return a.reactants == b.products && a.products == b.reactants;
}

EquilibriumSolution solve_single_reversible_equilibrium(const ReactionNetwork& network,
                                                        std::span<const double> u0) {
  const ReversibleLine line = reversible_line(network, u0);
  if (!(line.s_lo < line.s_hi)) throw NumericalError("degenerate compatibility class (empty interior)");

  for (std::size_t i = 0; i < line.u0.size(); ++i)
    if (line.v[i] == 0.0 && line.u0[i] == 0.0 && line.alpha[i] > 0.0)
      throw NumericalError("both flows vanish identically on the class; no sign change");

  double lo = line.s_lo, hi = line.s_hi;
  auto gap = [&](double s) { return line.log_flow_gap(line.at(s)); };
  if (std::isinf(lo)) {
    lo = (std::isinf(hi) ? 0.0 : hi) - 1.0;
    for (int k = 0; k < 200 && gap(lo) <= 0.0; ++k) lo = hi - 2.0 * (hi - lo);
  }
  if (std::isinf(hi)) {
    hi = lo + 1.0;
    for (int k = 0; k < 200 && gap(hi) >= 0.0; ++k) hi = lo + 2.0 * (hi - lo);
  }
  const double g_lo = std::isfinite(line.s_lo) ? line.log_flow_gap(line.endpoint(false)) : gap(lo);
  const double g_hi = std::isfinite(line.s_hi) ? line.log_flow_gap(line.endpoint(true)) : gap(hi);
  if (!(g_lo > 0.0) || !(g_hi < 0.0))
    throw NumericalError("flow difference has no sign change on the feasible interval");

  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (gap(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  std::vector<double> u = line.at(0.5 * (lo + hi));
  for (double& x : u) x = std::max(x, 0.0);
  EquilibriumSolution sol = make_solution(network, std::move(u));
  verify_equilibrium(network, sol.u_inf);
  return sol;
}

std::vector<EquilibriumSolution> find_boundary_equilibria_single(const ReactionNetwork& network,
                                                                 std::span<const double> u0) {
  const ReversibleLine line = reversible_line(network, u0);
  std::vector<EquilibriumSolution> found;
  if (line.s_lo > line.s_hi) return found;

  auto consider = [&](std::vector<double> u) {
    const double forward = line.kf * monomial(u, line.alpha);
    const double backward = line.kb * monomial(u, line.beta);
    if (forward != 0.0 || backward != 0.0) return;
    for (const auto& existing : found)
      if (existing.u_inf == u) return;
    EquilibriumSolution sol = make_solution(network, std::move(u));
    sol.kind = EquilibriumKind::Boundary;
    found.push_back(std::move(sol));
  };

  if (std::isfinite(line.s_lo)) consider(line.endpoint(false));
  if (std::isfinite(line.s_hi)) consider(line.endpoint(true));
  return found;
}

std::optional<std::vector<double>> find_complex_balanced_reference(const ReactionNetwork& network) {
  const std::size_t m = network.species_count();
  constexpr double tol = 1e-12;
  auto misfit = [&](double log10t) {
    const std::vector<double> u(m, std::pow(10.0, log10t));
    const ComplexBalanceReport rep = check_complex_balance(network, u, tol);
    double worst = 0.0;
    for (double r : rep.residuals) worst = std::max(worst, std::abs(r));
    return worst / rep.scale;
  };

  constexpr int kSamples = 120;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kSamples; ++k) {
    const double x = -3.0 + 6.0 * k / kSamples;
    const double v = misfit(x);
    // Among equally good points prefer the one closest to t = 1.
    if (v < best_value || (v == best_value && std::abs(x) < std::abs(-3.0 + 6.0 * best / kSamples))) {
      best_value = v;
      best = k;
    }
  }
  double best_x = -3.0 + 6.0 * best / kSamples;
  if (best_value > tol) {
    // Golden-section refinement between the neighbouring grid points.
    double a = -3.0 + 6.0 * std::max(best - 1, 0) / kSamples;
    double b = -3.0 + 6.0 * std::min(best + 1, kSamples) / kSamples;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = misfit(c), fd = misfit(d);
    for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
      if (fc < fd) {
        b = d; d = c; fd = fc;
        c = b - phi * (b - a); fc = misfit(c);
      } else {
        a = c; c = d; fc = fd;
        d = a + phi * (b - a); fd = misfit(d);
      }
    }
    best_x = fc < fd ? c : d;
    best_value = std::min(fc, fd);
  }
  if (best_value > tol) return std::nullopt;
  return std::vector<double>(m, std::pow(10.0, best_x));
}

std::optional<std::vector<double>> kirchhoff_reference(const ReactionNetwork& network) {
  const std::size_t m = network.species_count();
  std::vector<std::vector<double>> complexes;
  auto index_of = [&](const std::vector<double>& y) {
    const auto it = std::find(complexes.begin(), complexes.end(), y);
    if (it != complexes.end()) return static_cast<std::size_t>(it - complexes.begin());
    complexes.push_back(y);
    return complexes.size() - 1;
  };
  struct Edge {
    std::size_t from, to;
    double rate;
  };
  std::vector<Edge> edges;
  for (const Reaction& rx : network.reactions()) {
    const std::size_t a = index_of(rx.reactants);
    const std::size_t b = index_of(rx.products);
    edges.push_back({a, b, rx.rate});
  }
  const std::size_t nc = complexes.size();

  // Linkage classes by union-find.
  std::vector<std::size_t> parent(nc);
  for (std::size_t i = 0; i < nc; ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> root = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = root(parent[i]);
  };
  for (const Edge& e : edges) parent[root(e.from)] = root(e.to);

  std::vector<std::vector<std::size_t>> classes;
  std::vector<long> class_of(nc, -1);
  for (std::size_t i = 0; i < nc; ++i) {
    const std::size_t r = root(i);
    if (class_of[r] < 0) {
      class_of[r] = static_cast<long>(classes.size());
      classes.emplace_back();
    }
    classes[static_cast<std::size_t>(class_of[r])].push_back(i);
  }

  // Within each class psi(u) = u^y must be proportional to the positive
  // kernel vector of the class Kirchhoff matrix.
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (const auto& cls : classes) {
    const auto n = static_cast<Eigen::Index>(cls.size());
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    auto local = [&](std::size_t c) {
      return static_cast<Eigen::Index>(std::find(cls.begin(), cls.end(), c) - cls.begin());
    };
    for (const Edge& e : edges) {
      if (std::find(cls.begin(), cls.end(), e.from) == cls.end()) continue;
      lap(local(e.to), local(e.from)) += e.rate;
      lap(local(e.from), local(e.from)) -= e.rate;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(lap);
    const Eigen::MatrixXd kernel = lu.kernel();
    if (kernel.cols() != 1) return std::nullopt;
    Eigen::VectorXd v = kernel.col(0);
    if (v.sum() < 0.0) v = -v;
    if (v.minCoeff() <= 1e-12 * v.cwiseAbs().maxCoeff()) return std::nullopt;
    for (Eigen::Index j = 1; j < n; ++j) {
      Eigen::VectorXd row(static_cast<Eigen::Index>(m));
      for (std::size_t i = 0; i < m; ++i)
        row(static_cast<Eigen::Index>(i)) = complexes[cls[static_cast<std::size_t>(j)]][i] - complexes[cls[0]][i];
      rows.push_back(row);
      rhs.push_back(std::log(v(j) / v(0)));
    }
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  if (!rows.empty()) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      a.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
      b(static_cast<Eigen::Index>(r)) = rhs[r];
    }
    x = a.completeOrthogonalDecomposition().solve(b);
    if ((a * x - b).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + b.cwiseAbs().maxCoeff())) return std::nullopt;
  }
  std::vector<double> u(m);
  for (std::size_t i = 0; i < m; ++i) u[i] = std::exp(x(static_cast<Eigen::Index>(i)));
  if (!check_complex_balance(network, u, 1e-10).balanced) return std::nullopt;
  return u;
}

EquilibriumSolution solve_complex_balanced_equilibrium(const ReactionNetwork& network,
                                                       std::span<const double> u0) {
  const std::size_t m = network.species_count();
  if (u0.size() != m) throw Error("initial state dimension does not match network");
  for (double v : u0)
    if (!(v >= 0.0)) throw Error("initial state must be nonnegative");
  if (std::all_of(u0.begin(), u0.end(), [](double v) { return v == 0.0; }))
    throw NumericalError("degenerate compatibility class (zero state)");

  const std::vector<double> start(u0.begin(), u0.end());
  if (std::all_of(start.begin(), start.end(), [](double v) { return v > 0.0; }) &&
      check_complex_balance(network, start).balanced) {
    verify_equilibrium(network, start);
    return make_solution(network, start);
  }

  auto reference = find_complex_balanced_reference(network);
  if (!reference) reference = kirchhoff_reference(network);
  if (!reference) {
    if (is_single_reversible_pair(network)) return solve_single_reversible_equilibrium(network, u0);
    throw NumericalError("no complex-balanced reference state found on the ray (t, ..., t)");
  }

  // Minimising sum u log(u / c) - u over {W u = W u0} gives u = c exp(W^T lambda);
  // lambda minimises the convex dual sum_i u_i(lambda) - lambda . W u0.
  const Eigen::MatrixXd w = conservation_laws(network);
  const Eigen::Map<const Eigen::VectorXd> c(reference->data(), static_cast<Eigen::Index>(m));
  const Eigen::Map<const Eigen::VectorXd> u0v(u0.data(), static_cast<Eigen::Index>(m));
  const Eigen::VectorXd target = w * u0v;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(w.rows());

  auto state = [&](const Eigen::VectorXd& l) -> Eigen::VectorXd {
    return (c.array() * (w.transpose() * l).array().exp()).matrix();
  };
  auto dual = [&](const Eigen::VectorXd& l) { return state(l).sum() - l.dot(target); };

  const double gtol = 1e-14 * std::max(1.0, target.cwiseAbs().maxCoeff());
  bool converged = w.rows() == 0;
  for (int it = 0; it < 200 && !converged; ++it) {
    const Eigen::VectorXd u = state(lambda);
    const Eigen::VectorXd grad = w * u - target;
    if (grad.cwiseAbs().maxCoeff() <= gtol) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd hess = w * u.asDiagonal() * w.transpose();
    const Eigen::VectorXd step = -hess.ldlt().solve(grad);
    const double base = dual(lambda);
    const double slope = grad.dot(step);
    double t = 1.0;
    // Near the optimum the dual decrease drowns in rounding; a smaller
    // gradient is accepted instead.
    const double gnorm = grad.norm();
    auto accept = [&](double tt) {
      const Eigen::VectorXd trial = lambda + tt * step;
      return dual(trial) <= base + 1e-4 * tt * slope || (w * state(trial) - target).norm() < 0.5 * gnorm;
    };
    while (t > 1e-12 && !accept(t)) t *= 0.5;
    lambda += t * step;
    if (!lambda.allFinite() || lambda.cwiseAbs().maxCoeff() > 700.0)
      throw NumericalError("compatibility class has no positive point (dual Newton diverged)");
  }
  if (!converged) {
    const Eigen::VectorXd grad = w * state(lambda) - target;
    if (grad.cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, target.cwiseAbs().maxCoeff()))
      throw NumericalError("Newton iteration for the complex-balanced equilibrium did not converge");
  }

  const Eigen::VectorXd u = state(lambda);
  std::vector<double> result(u.data(), u.data() + u.size());
  verify_equilibrium(network, result);
  if (!check_complex_balance(network, result, 1e-10).balanced)
    throw NumericalError("candidate equilibrium is not complex balanced");
  return make_solution(network, std::move(result));
}

}  // namespace rdslab
