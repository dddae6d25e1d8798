#include "rdslab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "rdslab/error.hpp"
#include "rdslab/kernels.hpp"

namespace rdslab {

SpatialGrid::SpatialGrid(std::vector<double> lengths, std::vector<std::size_t> counts)
    : lengths_(std::move(lengths)), counts_(std::move(counts)) {
  if (counts_.empty() || counts_.size() > 2) throw Error("grid dimension must be 1 or 2");
  if (lengths_.size() != counts_.size()) throw Error("grid lengths and counts differ in dimension");
  node_count_ = 1;
  cell_volume_ = 1.0;
  for (std::size_t a = 0; a < counts_.size(); ++a) {
    if (counts_[a] < 4) throw Error("grid needs at least 4 nodes per axis");
    if (!(lengths_[a] > 0.0) || !std::isfinite(lengths_[a])) throw Error("grid lengths must be positive");
    node_count_ *= counts_[a];
    cell_volume_ *= spacing(a);
  }
}

SpatialGrid SpatialGrid::interval(double length, std::size_t nodes) {
  return SpatialGrid({length}, {nodes});
}

SpatialGrid SpatialGrid::rectangle(double lx, double ly, std::size_t nx, std::size_t ny) {
  return SpatialGrid({lx, ly}, {nx, ny});
}

double SpatialGrid::volume() const noexcept {
  double v = 1.0;
  for (double l : lengths_) v *= l;
  return v;
}

double SpatialGrid::coordinate(std::size_t axis, std::size_t index) const {
  return (static_cast<double>(index) + 0.5) * spacing(axis);
}

std::array<double, 2> SpatialGrid::position(std::size_t node) const {
  if (dim() == 1) return {coordinate(0, node), 0.0};
  return {coordinate(0, node % counts_[0]), coordinate(1, node / counts_[0])};
}

// ---------------------------------------------------------------------------

namespace {

void require_size(std::span<const double> u, const SpatialGrid& grid) {
  if (u.size() != grid.node_count())
    throw Error("field has " + std::to_string(u.size()) + " values, grid has " +
                std::to_string(grid.node_count()) + " nodes");
}

double inv_h2(const SpatialGrid& grid, std::size_t axis) {
  const double h = grid.spacing(axis);
  return 1.0 / (h * h);
}

}  // namespace

void laplacian(std::span<const double> u, std::span<double> out, const SpatialGrid& grid) {
  require_size(u, grid);
  if (out.size() != u.size()) throw Error("laplacian output size mismatch");
  const auto& k = kernels::active();
  if (grid.dim() == 1) {
    k.laplacian_1d(u.data(), out.data(), u.size(), inv_h2(grid, 0));
  } else {
    k.laplacian_2d(u.data(), out.data(), grid.count(0), grid.count(1), inv_h2(grid, 0), inv_h2(grid, 1));
  }
}

Field laplacian(std::span<const double> u, const SpatialGrid& grid) {
  Field out(u.size());
  laplacian(u, out, grid);
  return out;
}

double lp_norm(std::span<const double> u, const SpatialGrid& grid, double p) {
  require_size(u, grid);
  if (!(p >= 1.0)) throw Error("lp_norm requires p >= 1");
  if (std::isinf(p)) return kernels::max_abs(u);
  const double w = grid.cell_volume();
  if (p == 1.0) return kernels::sum_abs(u) * w;
  if (p == 2.0) return std::sqrt(kernels::sum_sq(u) * w);
  double s = 0.0;
  for (double v : u) s += std::pow(std::fabs(v), p);
  return std::pow(s * w, 1.0 / p);
}

double integral(std::span<const double> u, const SpatialGrid& grid) {
  require_size(u, grid);
  return kernels::sum(u) * grid.cell_volume();
}

double spatial_average(std::span<const double> u, const SpatialGrid& grid) {
  require_size(u, grid);
  return kernels::sum(u) / static_cast<double>(u.size());
}

double dirichlet_energy(std::span<const double> u, const SpatialGrid& grid) {
  require_size(u, grid);
  const std::size_t nx = grid.count(0);
  const std::size_t ny = grid.dim() == 2 ? grid.count(1) : 1;
  const double ihx2 = inv_h2(grid, 0);
  double s = 0.0;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    const double* row = u.data() + iy * nx;
    for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
      const double g = row[ix + 1] - row[ix];
      s += g * g * ihx2;
    }
  }
  if (grid.dim() == 2) {
    const double ihy2 = inv_h2(grid, 1);
    for (std::size_t iy = 0; iy + 1 < ny; ++iy)
      for (std::size_t ix = 0; ix < nx; ++ix) {
        const double g = u[(iy + 1) * nx + ix] - u[iy * nx + ix];
        s += g * g * ihy2;
      }
  }
  return s * grid.cell_volume();
}

double poincare_constant(const SpatialGrid& grid) {
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    const double h = grid.spacing(a);
    const double s = std::sin(std::numbers::pi / (2.0 * static_cast<double>(grid.count(a))));
    c = std::min(c, 4.0 * s * s / (h * h));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Implicit diffusion

ImplicitDiffusion::ImplicitDiffusion(const SpatialGrid& grid, double diffusion, double dt, double rel_tol)
    : grid_(grid), diffusion_(diffusion), dt_(dt), rel_tol_(rel_tol) {
  if (!(dt > 0.0)) throw Error("implicit diffusion needs dt > 0");
  if (!(diffusion >= 0.0)) throw Error("implicit diffusion needs d >= 0");
  if (diffusion == 0.0) return;

  if (grid_.dim() == 1) {
    const std::size_t n = grid_.node_count();
    coupling_ = dt * diffusion * inv_h2(grid_, 0);
    const double off = -coupling_;
    sweep_.resize(n);
    pivot_inv_.resize(n);
    double prev_sweep = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double neighbours = (i == 0 || i + 1 == n) ? 1.0 : 2.0;
      const double diag = 1.0 + neighbours * coupling_;
      const double denom = i == 0 ? diag : diag - off * prev_sweep;
      pivot_inv_[i] = 1.0 / denom;
      sweep_[i] = off * pivot_inv_[i];
      prev_sweep = sweep_[i];
    }
    return;
  }

  const std::size_t nx = grid_.count(0), ny = grid_.count(1);
  const double cx = dt * diffusion * inv_h2(grid_, 0);
  const double cy = dt * diffusion * inv_h2(grid_, 1);
  jacobi_inv_.resize(grid_.node_count());
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double nbx = (ix == 0 || ix + 1 == nx) ? 1.0 : 2.0;
      const double nby = (iy == 0 || iy + 1 == ny) ? 1.0 : 2.0;
      jacobi_inv_[iy * nx + ix] = 1.0 / (1.0 + nbx * cx + nby * cy);
    }
}

void ImplicitDiffusion::solve(std::span<const double> rhs, std::span<double> out) const {
  require_size(rhs, grid_);
  if (out.size() != rhs.size()) throw Error("implicit diffusion output size mismatch");
  if (diffusion_ == 0.0) {
    if (out.data() != rhs.data()) std::copy(rhs.begin(), rhs.end(), out.begin());
    return;
  }
  if (grid_.dim() == 1) {
    solve_tridiagonal(rhs, out);
  } else {
    solve_cg(rhs, out);
  }
}

void ImplicitDiffusion::solve_tridiagonal(std::span<const double> rhs, std::span<double> out) const {
  const std::size_t n = rhs.size();
  const double off = -coupling_;
  // Forward elimination writes into out, so aliasing rhs is safe.
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = i == 0 ? rhs[0] : rhs[i] - off * prev;
    out[i] = v * pivot_inv_[i];
    prev = out[i];
  }
  for (std::size_t i = n - 1; i-- > 0;) out[i] -= sweep_[i] * out[i + 1];
}

void ImplicitDiffusion::solve_cg(std::span<const double> rhs, std::span<double> out) const {
  const std::size_t n = rhs.size();
  const double scale = dt_ * diffusion_;
  Field b(rhs.begin(), rhs.end());
  Field x(b);
  Field r(n), z(n), p(n), ap(n);

  auto apply = [&](const Field& v, Field& result) {
    laplacian(v, result, grid_);
    for (std::size_t i = 0; i < n; ++i) result[i] = v[i] - scale * result[i];
  };

  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  const double target = rel_tol_ * std::sqrt(kernels::sum_sq(b));
  if (std::sqrt(kernels::sum_sq(r)) <= target) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] * jacobi_inv_[i];
  p = z;
  double rz = kernels::dot(r, z);

  const std::size_t max_iter = 20 * n + 100;
  for (std::size_t it = 0; it < max_iter; ++it) {
    apply(p, ap);
    const double alpha = rz / kernels::dot(p, ap);
    kernels::axpy(alpha, p, x);
    kernels::axpy(-alpha, ap, r);
    if (std::sqrt(kernels::sum_sq(r)) <= target) {
      std::copy(x.begin(), x.end(), out.begin());
      return;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] * jacobi_inv_[i];
    const double rz_next = kernels::dot(r, z);
    kernels::xpay(z, rz_next / rz, p);
    rz = rz_next;
  }
  throw NumericalError("conjugate gradients did not converge in the implicit diffusion solve");
}

Field heat_solve_implicit(std::span<const double> u, const SpatialGrid& grid, double diffusion, double dt) {
  Field out(u.size());
  ImplicitDiffusion(grid, diffusion, dt).solve(u, out);
  return out;
}

// ---------------------------------------------------------------------------
// Maximal-regularity estimator

double regularity_ratio(const SpatialGrid& grid, double diffusion, double p, double dt, std::size_t steps,
                        const std::function<void(std::size_t, std::span<double>)>& source) {
  if (!(p >= 1.0) || std::isinf(p)) throw Error("regularity ratio needs finite p >= 1");
  const ImplicitDiffusion heat(grid, diffusion, dt);
  const std::size_t n = grid.node_count();
  Field phi(n, 0.0), theta(n), lap(n);
  double lap_sum = 0.0, theta_sum = 0.0;

  auto accumulate = [p](const Field& v) {
    if (p == 2.0) return kernels::sum_sq(v);
    if (p == 1.0) return kernels::sum_abs(v);
    double s = 0.0;
    for (double x : v) s += std::pow(std::fabs(x), p);
    return s;
  };

  for (std::size_t step = 0; step < steps; ++step) {
    source(step, theta);
    laplacian(phi, lap, grid);
    lap_sum += accumulate(lap);
    theta_sum += accumulate(theta);
    kernels::axpy(dt, theta, phi);
    heat.solve(phi, phi);
  }
  if (theta_sum == 0.0) return 0.0;
  // The common factor h^n dt cancels in the ratio.
  return std::pow(lap_sum / theta_sum, 1.0 / p);
}

RegularityEstimate estimate_regularity_constant(const SpatialGrid& grid, const RegularityOptions& options) {
  if (options.sources < 1) throw Error("regularity estimate needs at least one source");
  if (!(options.horizon > 0.0) || !(options.dt > 0.0)) throw Error("regularity estimate needs T, dt > 0");
  const auto steps = static_cast<std::size_t>(std::llround(options.horizon / options.dt));

  RegularityEstimate est;
  est.diffusion = options.diffusion;
  est.p = options.p;
  est.horizon = options.horizon;
  est.dt = options.dt;
  for (std::size_t s = 0; s < options.sources; ++s) {
    std::mt19937_64 rng(options.seed * 0x9E3779B97F4A7C15ull + s);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double ratio = regularity_ratio(grid, options.diffusion, options.p, options.dt, steps,
                                          [&](std::size_t, std::span<double> theta) {
                                            for (double& v : theta) v = normal(rng);
                                          });
    est.ratios.push_back(ratio);
    est.c_hat = std::max(est.c_hat, ratio);
    est.running_max.push_back(est.c_hat);
    ++est.samples;
  }
  return est;
}

}  // namespace rdslab
