#pragma once

// Cell-centred grids on boxes in one or two dimensions with homogeneous
// Neumann boundary conditions. Node values represent cell averages; the
// Laplacian uses reflected ghost nodes (u_{-1} = u_0), which makes it
// symmetric with zero row sums.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace rdslab {

class SpatialGrid {
 public:
  // One entry per axis; 1 or 2 axes, at least 4 nodes per axis.
  SpatialGrid(std::vector<double> lengths, std::vector<std::size_t> counts);

  static SpatialGrid interval(double length, std::size_t nodes);
  static SpatialGrid rectangle(double lx, double ly, std::size_t nx, std::size_t ny);

  std::size_t dim() const noexcept { return counts_.size(); }
  std::size_t node_count() const noexcept { return node_count_; }
  double length(std::size_t axis) const { return lengths_.at(axis); }
  std::size_t count(std::size_t axis) const { return counts_.at(axis); }
  double spacing(std::size_t axis) const { return lengths_.at(axis) / static_cast<double>(counts_.at(axis)); }
  const std::vector<double>& lengths() const noexcept { return lengths_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }

  // h^n, the quadrature weight of a node.
  double cell_volume() const noexcept { return cell_volume_; }
  // |Omega|
  double volume() const noexcept;

  double coordinate(std::size_t axis, std::size_t index) const;
  // Coordinates of a node in row-major order (x fastest); unused axes are 0.
  std::array<double, 2> position(std::size_t node) const;

  bool operator==(const SpatialGrid&) const = default;

 private:
  std::vector<double> lengths_;
  std::vector<std::size_t> counts_;
  std::size_t node_count_ = 0;
  double cell_volume_ = 0.0;
};

using Field = std::vector<double>;

// The discrete u(., t): one array per species.
struct FieldState {
  double time = 0.0;
  std::vector<Field> species;
};

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

void laplacian(std::span<const double> u, std::span<double> out, const SpatialGrid& grid);
Field laplacian(std::span<const double> u, const SpatialGrid& grid);

// (sum |u|^p h^n)^(1/p); p = kInfNorm gives max |u|. Throws Error for p < 1.
double lp_norm(std::span<const double> u, const SpatialGrid& grid, double p);
double integral(std::span<const double> u, const SpatialGrid& grid);
double spatial_average(std::span<const double> u, const SpatialGrid& grid);

// sum |grad_h u|^2 h^n with forward differences across interior faces, so that
// laplacian = -grad_h^T grad_h.
double dirichlet_energy(std::span<const double> u, const SpatialGrid& grid);

// Smallest nonzero eigenvalue of -laplacian: min over axes of (2/h^2)(1 - cos(pi h / L)).
double poincare_constant(const SpatialGrid& grid);

// Backward-Euler diffusion operator (I - dt d laplacian)^{-1} for one (d, dt).
// 1D uses a precomputed tridiagonal factorisation, 2D uses Jacobi-preconditioned
// conjugate gradients with residual <= rel_tol * |rhs|_2.
class ImplicitDiffusion {
 public:
  ImplicitDiffusion(const SpatialGrid& grid, double diffusion, double dt, double rel_tol = 1e-12);

  // out may alias rhs. Throws NumericalError if CG does not converge.
  void solve(std::span<const double> rhs, std::span<double> out) const;

  double diffusion() const noexcept { return diffusion_; }
  double dt() const noexcept { return dt_; }

 private:
  void solve_tridiagonal(std::span<const double> rhs, std::span<double> out) const;
  void solve_cg(std::span<const double> rhs, std::span<double> out) const;

  SpatialGrid grid_;
  double diffusion_;
  double dt_;
  double rel_tol_;
  double coupling_ = 0.0;  // dt * d / h^2 (1D)
  std::vector<double> sweep_;  // modified super-diagonal, Thomas algorithm
  std::vector<double> pivot_inv_;
  std::vector<double> jacobi_inv_;
};

// One backward-Euler heat step. Throws Error if dt <= 0 or d < 0.
Field heat_solve_implicit(std::span<const double> u, const SpatialGrid& grid, double diffusion,
                          double dt);

// Empirical maximal-regularity ratio |lap phi|_{p} / |theta|_{p} in space-time
// for phi_t - d lap phi = theta, phi(0) = 0, marched by backward Euler. The
// source callback fills theta at step n. Space-time norms use the left
// endpoint in time. Returns 0 when theta vanishes identically.
double regularity_ratio(const SpatialGrid& grid, double diffusion, double p, double dt,
                        std::size_t steps,
                        const std::function<void(std::size_t step, std::span<double> theta)>& source);

struct RegularityOptions {
  double diffusion = 1.0;
  double p = 2.0;
  std::size_t sources = 8;
  double horizon = 5.0;
  double dt = 1e-2;
  std::uint64_t seed = 1;
};

struct RegularityEstimate {
  double diffusion = 0.0;
  double p = 0.0;
  double c_hat = 0.0;                // running maximum over sources
  std::size_t samples = 0;
  std::vector<double> ratios;        // per source
  std::vector<double> running_max;   // c_hat after each source
  double horizon = 0.0;
  double dt = 0.0;
};

// Node-wise standard normal sources, one draw per node and step, seeded so that
// estimates at different d see identical sources.
RegularityEstimate estimate_regularity_constant(const SpatialGrid& grid, const RegularityOptions& options);

}  // namespace rdslab
