#include <doctest.h>

#include <cmath>
#include <vector>

#include "rdslab/error.hpp"
#include "rdslab/network.hpp"
#include "rdslab/solver.hpp"

using namespace rdslab;

namespace {

Nonlinearity linear(double c) {
  return Nonlinearity::custom("linear", {"u"}, [c](std::span<const double> u, std::span<double> out) { out[0] = c * u[0]; });
}

Nonlinearity zero_f(std::size_t m) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < m; ++i) names.push_back("s" + std::to_string(i));
  return Nonlinearity::custom("zero", names, [](std::span<const double>, std::span<double> out) {
    for (double& x : out) x = 0.0;
  });
}

BumpInit bumps(std::vector<double> base, std::vector<double> amp, std::vector<std::array<double, 2>> centers) {
  BumpInit b;
  b.base = std::move(base);
  b.amplitude = std::move(amp);
  b.centers = std::move(centers);
  b.width = 0.08;
  return b;
}

double max_diff(const FieldState& a, const FieldState& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.species.size(); ++i)
    for (std::size_t k = 0; k < a.species[i].size(); ++k) m = std::max(m, std::fabs(a.species[i][k] - b.species[i][k]));
  return m;
}

}  // namespace

TEST_CASE("cutoff functions") {
  CutoffPsi psi;
  CHECK(psi.value(-1.0) == 0.0);
  CHECK(psi.value(0.0) == 0.0);
  CHECK(psi.value(1.0) == 1.0);
  CHECK(psi.value(3.0) == 1.0);
  CHECK(psi.value(0.5) == doctest::Approx(0.5));
  CHECK(psi.derivative(0.5) == doctest::Approx(1.5));
  for (double s = 0; s <= 1.0; s += 0.01) CHECK(psi.derivative(s) <= 1.5 + 1e-15);
  CHECK(CutoffPsi(2.0).value(2.5) == doctest::Approx(0.5));

  CutoffPhi phi(2.0);
  CHECK(phi.value_at_norm(2.0) == 1.0);
  CHECK(phi.value_at_norm(4.0) == 0.0);
  CHECK(phi.value_at_norm(3.0) == doctest::Approx(0.5));
  CHECK(phi.value(std::vector<double>{1.8, 2.4}) == doctest::Approx(0.5));
  CHECK(phi.gradient_bound() == doctest::Approx(0.75));
  // Finite-difference slope stays under the declared bound.
  double slope = 0;
  for (double s = 2.0; s < 4.0; s += 1e-3) slope = std::max(slope, std::fabs(phi.value_at_norm(s + 1e-3) - phi.value_at_norm(s)) / 1e-3);
  CHECK(slope <= phi.gradient_bound() + 1e-9);
  CHECK_THROWS_AS(CutoffPhi(0.0), Error);
}

TEST_CASE("lipschitz estimates") {
  CutoffPhi big(100.0);
  const auto lin = lipschitz_estimate(linear(-1.0), big, 2000);
  CHECK(lin.value() == doctest::Approx(1.0).epsilon(0.05));
  CHECK(lin.value() <= 1.0 + 1e-12);
  CHECK(lipschitz_estimate(zero_f(2), big, 200).value() == 0.0);
  CutoffPhi r(3.0);
  const auto a = lipschitz_estimate(Nonlinearity::mass_action(parse_network("A <-> B @ 1, 1")), r, 500);
  const auto b = lipschitz_estimate(Nonlinearity::mass_action(parse_network("A <-> B @ 2, 2")), r, 500);
  CHECK(b.value() == doctest::Approx(2 * a.value()).epsilon(1e-12));
  CHECK(a.samples == 500);
}

TEST_CASE("initial data") {
  const auto g = SpatialGrid::interval(1.0, 64);
  auto b = bumps({1.0, 2.0}, {0.5, -0.3}, {{0.3, 0}, {0.7, 0}});
  b.zero_mean = true;
  const auto s = make_initial_state(b, g, 2);
  CHECK(spatial_average(s.species[0], g) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(spatial_average(s.species[1], g) == doctest::Approx(2.0).epsilon(1e-14));
  const auto r1 = make_initial_state(RandomInit{0.0, 1.0, 5}, g, 2);
  const auto r2 = make_initial_state(RandomInit{0.0, 1.0, 5}, g, 2);
  CHECK(r1.species == r2.species);
  for (double x : r1.species[1]) CHECK((x >= 0.0 && x <= 1.0));
  CHECK_THROWS_AS(make_initial_state(ConstantInit{{1.0}}, g, 2), Error);
}

TEST_CASE("config validation") {
  SimConfig c(zero_f(2), SpatialGrid::interval(1.0, 8), {1.0}, ConstantInit{{1, 1}});
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.diffusion = {1.0, 0.5};
  CHECK_NOTHROW(c.validate());
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.dt = 0.1;
  c.rescale = true;
  CHECK(c.rescale_factor() == 2.0);
  CHECK(c.effective_diffusion() == std::vector<double>{2.0, 1.0});
}

TEST_CASE("single IMEX steps") {
  const auto g = SpatialGrid::interval(1.0, 16);
  SimConfig c(zero_f(2), g, {1.0, 3.0}, ConstantInit{{0.7, 1.3}});
  c.dt = 0.05;
  const auto s0 = make_initial_state(c.initial, g, 2);
  CHECK(max_diff(step_imex(s0, c), s0) <= 1e-14);

  SimConfig d(linear(-1.0), g, {1.0}, ConstantInit{{1.0}});
  d.dt = 0.01;
  const auto s1 = step_imex(make_initial_state(d.initial, g, 1), d);
  for (double x : s1.species[0]) CHECK(x == doctest::Approx(0.99).epsilon(1e-14));
  CHECK(s1.time == doctest::Approx(0.01));

  d.t_end = 1.0;
  const auto traj = simulate(d);
  const double approx = traj.samples.back().linf[0];
  const double exact = std::exp(-1.0);
  CHECK(std::fabs(approx - std::pow(0.99, 100)) <= 1e-12);
  CHECK(std::fabs(approx - exact) <= d.dt);
}

TEST_CASE("zero horizon keeps only the initial sample") {
  SimConfig c(Nonlinearity::mass_action(parse_network("A -> B @ 1")), SpatialGrid::interval(1.0, 8), {1, 1},
              ConstantInit{{1, 0}});
  c.t_end = 0.0;
  const auto t = simulate(c);
  REQUIRE(t.samples.size() == 1);
  CHECK(t.samples[0].t == 0.0);
  CHECK(t.steps == 0);
}

TEST_CASE("mass and maximum principle for a dissipative network") {
  const auto g = SpatialGrid::interval(1.0, 48);
  for (bool equal : {false, true}) {
    SimConfig c(Nonlinearity::mass_action(parse_network("A + B -> C @ 1")), g,
                equal ? std::vector<double>{1, 1, 1} : std::vector<double>{1, 2, 3},
                bumps({0.5, 0.5, 0.1}, {2.0, 1.5, 0.0}, {{0.3, 0}, {0.6, 0}, {0.5, 0}}));
    c.dt = 1e-3;
    c.t_end = 2.0;
    const auto t = simulate(c);
    CHECK_FALSE(t.blowup);
    for (std::size_t k = 1; k < t.samples.size(); ++k) {
      CHECK(t.samples[k].total_mass <= t.samples[k - 1].total_mass + 1e-10);
      if (equal) CHECK(t.samples[k].sum_linf <= t.samples[k - 1].sum_linf + 1e-10);
      for (double x : t.samples[k].linf) CHECK(x >= 0.0);
    }
    CHECK(t.samples.back().total_mass < t.samples.front().total_mass);
  }
}

TEST_CASE("conservative network converges to its equilibrium") {
  SimConfig c(Nonlinearity::mass_action(parse_network("A <-> B @ 1, 1")), SpatialGrid::interval(1.0, 16), {1, 1},
              ConstantInit{{2, 0}});
  c.dt = 1e-3;
  c.t_end = 20.0;
  c.stride = 100;
  const auto t = simulate(c);
  for (const auto& s : t.samples) CHECK(s.total_mass == doctest::Approx(t.samples[0].total_mass).epsilon(1e-10));
  const auto& last = t.final_state;
  for (const auto& f : last.species)
    for (double x : f) CHECK(std::fabs(x - 1.0) <= 1e-6);
}

TEST_CASE("rescaled run matches the plain run at scaled times") {
  const auto g = SpatialGrid::interval(1.0, 32);
  const auto net = parse_network("A + B <-> 2 B @ 1, 2");
  const auto init = bumps({1.0, 1.0}, {0.5, 0.4}, {{0.2, 0}, {0.8, 0}});
  SimConfig plain(Nonlinearity::mass_action(net), g, {2.0, 4.0}, init);
  plain.dt = 1e-3;
  plain.t_end = 1.0;
  plain.store_fields = true;
  plain.stride = 100;
  SimConfig scaled = plain;
  scaled.rescale = true;  // a = 1/2: v(t) = u(t/2)
  scaled.dt = 2e-3;
  scaled.t_end = 2.0;
  const auto p = simulate(plain);
  const auto s = simulate(scaled);
  REQUIRE(p.fields.size() == s.fields.size());
  for (std::size_t k = 0; k < p.fields.size(); ++k) {
    CHECK(s.samples[k].t == doctest::Approx(2 * p.samples[k].t));
    CHECK(max_diff(p.fields[k], s.fields[k]) <= 1e-12);
  }
}

TEST_CASE("truncation is inactive inside the ball") {
  const auto g = SpatialGrid::interval(1.0, 32);
  SimConfig c(Nonlinearity::mass_action(parse_network("A + B <-> 2 B @ 1, 2")), g, {1.0, 1.2},
              bumps({1.0, 1.0}, {0.5, 0.4}, {{0.2, 0}, {0.8, 0}}));
  c.dt = 1e-3;
  c.t_end = 1.0;
  const auto plain = simulate(c);
  double sup = 0;
  for (const auto& s : plain.samples) {
    double n2 = 0;
    for (double x : s.linf) n2 += x * x;
    sup = std::max(sup, std::sqrt(n2));
  }
  c.truncation_radius = 2 * sup;
  const auto trunc = simulate(c);
  CHECK(max_diff(plain.final_state, trunc.final_state) <= 1e-12);

  // A small ball changes the dynamics.
  c.truncation_radius = 0.2;
  CHECK(max_diff(plain.final_state, simulate(c).final_state) > 1e-3);
}

TEST_CASE("gronwall ceiling for a truncated, rescaled growth law") {
  const auto g = SpatialGrid::interval(1.0, 32);
  const double r = 5.0;
  SimConfig c(linear(1.0), g, {2.0}, bumps({0.3}, {0.2}, {{0.5, 0}}));
  c.truncation_radius = r;
  c.rescale = true;
  c.dt = 1e-3;
  c.t_end = 2.0;
  const auto t = simulate(c);
  const double a = c.rescale_factor();
  const double lr = lipschitz_estimate(linear(1.0), CutoffPhi(r), 2000).value();
  const double m0 = t.samples[0].linf[0];
  for (const auto& s : t.samples) CHECK(s.linf[0] <= m0 * std::exp(a * lr * s.t) * (1 + 1e-3));
}

TEST_CASE("ODE integrator") {
  const auto ab = Nonlinearity::mass_action(parse_network("A -> B @ 1"));
  const auto o = simulate_ode(ab, std::vector<double>{1, 0}, 1e-3, 2.0, 100);
  for (std::size_t k = 0; k < o.times.size(); ++k) {
    CHECK(std::fabs(o.states[k][0] - std::exp(-o.times[k])) <= 1e-8);
    CHECK(o.states[k][0] + o.states[k][1] == doctest::Approx(1.0).epsilon(1e-13));
  }
  const auto z = simulate_ode(zero_f(2), std::vector<double>{0.3, 0.4}, 0.1, 1.0);
  CHECK(z.states.back() == std::vector<double>{0.3, 0.4});
  const auto cyc = Nonlinearity::mass_action(parse_network("A -> B @ 1\nB -> C @ 1\nC -> A @ 1"));
  const auto c = simulate_ode(cyc, std::vector<double>{3, 0, 0}, 1e-2, 30.0, 100);
  for (double x : c.states.back()) CHECK(x == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("averaged residual") {
  const auto g = SpatialGrid::interval(1.0, 64);
  SimConfig lin(Nonlinearity::mass_action(parse_network("A <-> B @ 1, 2")), g, {1, 1},
                bumps({1, 1}, {0.5, 0.5}, {{0.3, 0}, {0.7, 0}}));
  lin.dt = 1e-3;
  lin.t_end = 0.1;
  lin.stride = 10;
  lin.store_fields = true;
  for (const auto& row : averaged_residual(simulate(lin), lin.nonlinearity, g))
    for (double x : row) CHECK(std::fabs(x) <= 1e-13);

  SimConfig flat(Nonlinearity::mass_action(parse_network("A + B -> C @ 1")), g, {1, 1, 1}, ConstantInit{{1, 2, 0}});
  flat.dt = 1e-3;
  flat.t_end = 0.1;
  flat.stride = 10;
  flat.store_fields = true;
  for (const auto& row : averaged_residual(simulate(flat), flat.nonlinearity, g))
    for (double x : row) CHECK(std::fabs(x) <= 1e-13);

  // Anticorrelated A and B: avg(u_A u_B) < avg u_A avg u_B, so g_C(0) < 0.
  SimConfig anti(Nonlinearity::mass_action(parse_network("A + B -> C @ 1")), g, {5, 5, 5},
                 bumps({0.1, 0.1, 0.0}, {2.0, 2.0, 0.0}, {{0.15, 0}, {0.85, 0}, {0.5, 0}}));
  anti.dt = 1e-4;
  anti.t_end = 0.5;
  anti.stride = 50;
  anti.store_fields = true;
  const auto traj = simulate(anti);
  const auto res = averaged_residual(traj, anti.nonlinearity, g);
  REQUIRE(res.size() == traj.fields.size());
  std::vector<double> gc;
  for (const auto& row : res) gc.push_back(row[2]);
  double prod = 0, ua = 0, ub = 0;
  const auto& f0 = traj.fields.front();
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    prod += f0.species[0][k] * f0.species[1][k];
    ua += f0.species[0][k];
    ub += f0.species[1][k];
  }
  const double n = static_cast<double>(g.node_count());
  CHECK(gc.front() == doctest::Approx(prod / n - (ua / n) * (ub / n)).epsilon(1e-10));
  CHECK(gc.front() < 0.0);
  // Diffusion homogenises the fields, so the residual decays.
  CHECK(std::fabs(gc.back()) < 1e-3 * std::fabs(gc.front()));

  SimConfig nofields = flat;
  nofields.store_fields = false;
  CHECK_THROWS_AS(averaged_residual(simulate(nofields), nofields.nonlinearity, g), Error);
}
