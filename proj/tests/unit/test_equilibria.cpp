#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rdslab/equilibria.hpp"
#include "rdslab/error.hpp"
#include "rdslab/network.hpp"

using namespace rdslab;

namespace {

double residual_inf(const ReactionNetwork& net, const std::vector<double>& u) {
  const auto f = Nonlinearity::mass_action(net).evaluate(u);
  double r = 0;
  for (double x : f) r = std::max(r, std::fabs(x));
  return r;
}

double max_flow(const ReactionNetwork& net, const std::vector<double>& u) {
  double m = 0;
  for (const auto& r : net.reactions()) m = std::max(m, r.rate * monomial(u, r.reactants));
  return m;
}

void check_class(const ReactionNetwork& net, const std::vector<double>& u0, const std::vector<double>& u) {
  const auto w = conservation_laws(net);
  for (Eigen::Index k = 0; k < w.rows(); ++k) {
    double a = 0, b = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      a += w(k, static_cast<Eigen::Index>(i)) * u0[i];
      b += w(k, static_cast<Eigen::Index>(i)) * u[i];
    }
    CHECK(b == doctest::Approx(a).epsilon(1e-8));
  }
}

}  // namespace

TEST_CASE("pointwise relative entropy") {
  CHECK(relative_entropy(std::vector<double>{1.5, 0.2}, std::vector<double>{1.5, 0.2}) == 0.0);
  CHECK(relative_entropy(std::vector<double>{2}, std::vector<double>{1}) == doctest::Approx(2 * std::log(2.0) - 1));
  CHECK(relative_entropy(std::vector<double>{0}, std::vector<double>{1}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_entropy(std::vector<double>{1}, std::vector<double>{0}), Error);
  CHECK_THROWS_AS(relative_entropy(std::vector<double>{-1}, std::vector<double>{1}), Error);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(1e-3, 10.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> u{dist(rng), dist(rng), dist(rng)}, v{dist(rng), dist(rng), dist(rng)};
    CHECK(relative_entropy(u, v) > 0.0);
  }
}

TEST_CASE("field relative entropy") {
  const auto grid = SpatialGrid::interval(1.0, 4);
  FieldState s{0.0, {Field(4, 2.0)}};
  CHECK(relative_entropy(s, grid, std::vector<double>{1}) == doctest::Approx(2 * std::log(2.0) - 1));
  s.species[0].assign(4, 1.0);
  CHECK(relative_entropy(s, grid, std::vector<double>{1}) == 0.0);
  // Two halves at 1 and 3.
  s.species[0] = {1, 1, 3, 3};
  CHECK(relative_entropy(s, grid, std::vector<double>{1}) == doctest::Approx(0.5 * (3 * std::log(3.0) - 2)));
}

TEST_CASE("single reversible pair") {
  auto ab = parse_network("A <-> B @ 1, 1");
  CHECK(is_single_reversible_pair(ab));
  CHECK_FALSE(is_single_reversible_pair(parse_network("A -> B @ 1\nB -> C @ 1\nC -> A @ 1")));
  auto s = solve_single_reversible_equilibrium(ab, std::vector<double>{2, 0});
  CHECK(s.u_inf[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.u_inf[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.kind == EquilibriumKind::Positive);
  CHECK_THROWS_AS(solve_single_reversible_equilibrium(ab, std::vector<double>{0, 0}), NumericalError);

  auto auto_cat = parse_network("A + B <-> 2 B @ 1, 2");
  s = solve_single_reversible_equilibrium(auto_cat, std::vector<double>{1.5, 1.5});
  CHECK(s.u_inf[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(s.u_inf[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("boundary equilibria of a single pair") {
  auto b = find_boundary_equilibria_single(parse_network("A + B <-> 2 B @ 1, 1"), std::vector<double>{1, 1});
  REQUIRE(b.size() == 1);
  CHECK(b[0].u_inf[0] == doctest::Approx(2.0));
  CHECK(b[0].u_inf[1] == doctest::Approx(0.0));
  CHECK(b[0].kind == EquilibriumKind::Boundary);
  CHECK(find_boundary_equilibria_single(parse_network("A <-> B @ 1, 1"), std::vector<double>{1, 1}).empty());
}

TEST_CASE("complex balanced equilibria") {
  auto ab = parse_network("A <-> B @ 1, 1");
  auto s = solve_complex_balanced_equilibrium(ab, std::vector<double>{2, 0});
  CHECK(s.u_inf[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.u_inf[1] == doctest::Approx(1.0).epsilon(1e-10));

  auto cyc = parse_network("A -> B @ 1\nB -> C @ 1\nC -> A @ 1");
  s = solve_complex_balanced_equilibrium(cyc, std::vector<double>{3, 0, 0});
  for (double x : s.u_inf) CHECK(x == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.conserved.size() == 1);

  // A verified equilibrium is a fixed point.
  auto again = solve_complex_balanced_equilibrium(cyc, s.u_inf);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again.u_inf[i] == doctest::Approx(s.u_inf[i]).epsilon(1e-12));
}

TEST_CASE("equilibrium invariants over a corpus") {
  const char* corpus[] = {
      "A <-> B @ 1, 1",
      "A <-> B @ 3, 1",
      "2 A <-> B @ 1, 2",
      "A + B <-> 2 B @ 1, 2",
      "A + B <-> C @ 2, 1",
      "A -> B @ 1\nB -> C @ 2\nC -> A @ 3",
      "A <-> B @ 1, 2\nB <-> C @ 3, 1\nC <-> A @ 1, 5",
  };
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dist(0.1, 4.0);
  for (const char* text : corpus) {
    const auto net = parse_network(text);
    for (int t = 0; t < 5; ++t) {
      std::vector<double> u0(net.species_count());
      for (double& x : u0) x = dist(rng);
      const auto s = solve_complex_balanced_equilibrium(net, u0);
      CHECK(residual_inf(net, s.u_inf) <= 1e-10 * (1 + max_flow(net, s.u_inf)));
      check_class(net, u0, s.u_inf);
      CHECK(check_complex_balance(net, s.u_inf, 1e-10).balanced);
      if (is_single_reversible_pair(net)) {
        const auto b = solve_single_reversible_equilibrium(net, u0);
        for (std::size_t i = 0; i < u0.size(); ++i) CHECK(b.u_inf[i] == doctest::Approx(s.u_inf[i]).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("reference states") {
  auto ray = find_complex_balanced_reference(parse_network("A <-> B @ 1, 1"));
  REQUIRE(ray.has_value());
  CHECK((*ray)[0] == doctest::Approx((*ray)[1]));

  // Reversible triangle with unequal rates has no balanced point on the diagonal.
  auto tri = parse_network("A <-> B @ 1, 2\nB <-> C @ 3, 1\nC <-> A @ 1, 5");
  auto k = kirchhoff_reference(tri);
  REQUIRE(k.has_value());
  CHECK(check_complex_balance(tri, *k, 1e-10).balanced);

  CHECK_FALSE(kirchhoff_reference(parse_network("A -> B @ 1")).has_value());
}
