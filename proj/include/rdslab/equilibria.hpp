#pragma once

// Complex-balanced and boundary equilibria within a compatibility class, and
// the relative entropy E[u | u_inf] = sum u log(u / u_inf) - u + u_inf.

#include <optional>
#include <span>
#include <vector>

#include "rdslab/grid.hpp"
#include "rdslab/network.hpp"

namespace rdslab {

enum class EquilibriumKind { Positive, Boundary };

struct EquilibriumSolution {
  std::vector<double> u_inf;
  std::vector<double> conserved;  // W u_inf for the rows W of conservation_laws
  EquilibriumKind kind = EquilibriumKind::Positive;
};

// Pointwise entropy with 0 log 0 = 0. Throws Error if u_inf has a
// nonpositive entry or u a negative one.
double relative_entropy(std::span<const double> u, std::span<const double> u_inf);

// Midpoint quadrature of the entropy density over the grid.
double relative_entropy(const FieldState& field, const SpatialGrid& grid,
                        std::span<const double> u_inf);

// Networks consisting of exactly one forward/backward pair.
bool is_single_reversible_pair(const ReactionNetwork& network);

// Interior equilibrium on the line u0 + s (beta - alpha), found by bisection
// on the log-flow difference. Throws NumericalError for an empty class or when
// the flow difference has no sign change on the feasible interval.
EquilibriumSolution solve_single_reversible_equilibrium(const ReactionNetwork& network,
                                                        std::span<const double> u0);

// Endpoints of the feasible interval at which both flows vanish.
std::vector<EquilibriumSolution> find_boundary_equilibria_single(const ReactionNetwork& network,
                                                                 std::span<const double> u0);

// A positive complex-balanced state on the ray (t, ..., t), if one exists.
std::optional<std::vector<double>> find_complex_balanced_reference(const ReactionNetwork& network);

// A positive complex-balanced state from the Kirchhoff kernel of each linkage
// class: u^{y_j} / u^{y_r} = kappa_j / kappa_r, solved for log u. Empty when the
// network admits none (not weakly reversible, or the log-linear system is
// inconsistent).
std::optional<std::vector<double>> kirchhoff_reference(const ReactionNetwork& network);

// Unique complex-balanced equilibrium in the class of u0, by damped Newton on
// the entropy minimisation (in the dual coordinates of the conservation laws).
// The reference state comes from the diagonal ray, else from
// kirchhoff_reference; single reversible pairs without either fall back to
// bisection.
EquilibriumSolution solve_complex_balanced_equilibrium(const ReactionNetwork& network,
                                                       std::span<const double> u0);

}  // namespace rdslab
