#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rdslab/error.hpp"
#include "rdslab/network.hpp"

using namespace rdslab;

namespace {

// Hand-rolled mass-action evaluation used as an oracle.
std::vector<double> naive_f(const ReactionNetwork& net, const std::vector<double>& u) {
  std::vector<double> f(net.species_count(), 0.0);
  for (const auto& r : net.reactions()) {
    double flow = r.rate;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (r.reactants[i] != 0.0) flow *= std::pow(u[i], r.reactants[i]);
    for (std::size_t i = 0; i < u.size(); ++i) f[i] += (r.products[i] - r.reactants[i]) * flow;
  }
  return f;
}

const char* kCorpus[] = {
    "A + B -> C @ 1",
    "A <-> B @ 1, 1",
    "A + B <-> 2 B @ 1, 2",
    "A -> B @ 1\nB -> C @ 1\nC -> A @ 1",
    "2 A + B -> 3 C @ 0.5\nC -> A @ 2",
    "A <-> 2 B @ 3, 1\nB + C -> 0 @ 0.1",
    "1.5 A -> B @ 1",
};

}  // namespace

TEST_CASE("parse basic and reversible reactions") {
  auto n = parse_network("A -> B @ 1.0");
  REQUIRE(n.species_count() == 2);
  REQUIRE(n.reaction_count() == 1);
  CHECK(n.reactions()[0].reactants == std::vector<double>{1, 0});
  CHECK(n.reactions()[0].products == std::vector<double>{0, 1});
  CHECK(n.reactions()[0].rate == 1.0);

  auto r = parse_network("A + B <-> 2 B @ 1.0, 0.5");
  REQUIRE(r.reaction_count() == 2);
  CHECK(r.reactions()[0].reactants == std::vector<double>{1, 1});
  CHECK(r.reactions()[0].products == std::vector<double>{0, 2});
  CHECK(r.reactions()[0].rate == 1.0);
  CHECK(r.reactions()[1].reactants == std::vector<double>{0, 2});
  CHECK(r.reactions()[1].products == std::vector<double>{1, 1});
  CHECK(r.reactions()[1].rate == 0.5);

  auto z = parse_network("# decay\n\nA -> 0 @ 0.1  # trailing\n");
  CHECK(z.species_count() == 1);
  CHECK(z.reactions()[0].products == std::vector<double>{0});
}

TEST_CASE("parse errors carry line numbers") {
  auto line_of = [](const char* text) -> std::size_t {
    try {
      parse_network(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("A -> @ 1.0") == 1);
  CHECK(line_of("A -> B @ 1\n\nA -> C @ -1") == 3);
  CHECK(line_of("# c\n0.5 A -> B @ 1") == 2);
  CHECK(line_of("A -> B") == 1);
  CHECK(line_of("A <-> B @ 1") == 1);
  CHECK(line_of("A => B @ 1") == 1);
}

TEST_CASE("format then parse is the identity") {
  for (const char* text : kCorpus) {
    const auto a = parse_network(text);
    const auto b = parse_network(format_network(a));
    CHECK(a == b);
  }
}

TEST_CASE("mass-action evaluation examples") {
  auto f = Nonlinearity::mass_action(parse_network("A -> B @ 1"));
  CHECK(f.evaluate(std::vector<double>{2, 0}) == std::vector<double>{-2, 2});
  auto g = Nonlinearity::mass_action(parse_network("A + B <-> 2 B @ 1, 1"));
  CHECK(g.evaluate(std::vector<double>{1, 1}) == std::vector<double>{0, 0});
  auto h = Nonlinearity::mass_action(parse_network("2 A + B -> 3 C @ 0.5\nC -> A @ 2"));
  CHECK(h.evaluate(std::vector<double>{0, 0, 0}) == std::vector<double>{0, 0, 0});
  CHECK_THROWS_AS(h.evaluate(std::vector<double>{1, 1}), Error);

  std::vector<double> out(2);
  Nonlinearity::builtin("remark-1-4").evaluate(std::vector<double>{0.5, -0.3}, out);
  const double u = 0.5, v = -0.3;
  CHECK(out[0] == doctest::Approx((-u + 2 * v) * std::exp(v) - u * v * std::exp(u * u)));
  CHECK(out[1] == doctest::Approx(-v * v * std::exp(v) + u * u * v * std::exp(u * u)));
  CHECK_THROWS_AS(Nonlinearity::builtin("nope"), ConfigError);
}

TEST_CASE("monomial conventions") {
  CHECK(monomial(std::vector<double>{0, 3}, std::vector<double>{0, 1}) == 3.0);
  CHECK(monomial(std::vector<double>{0, 3}, std::vector<double>{1.5, 1}) == 0.0);
  CHECK(monomial(std::vector<double>{4, 2}, std::vector<double>{1.5, 2}) == doctest::Approx(32.0));
}

TEST_CASE("evaluation agrees with a naive oracle on the corpus") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  for (const char* text : kCorpus) {
    const auto net = parse_network(text);
    const auto f = Nonlinearity::mass_action(net);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> u(net.species_count());
      for (double& x : u) x = dist(rng);
      const auto got = f.evaluate(u);
      const auto ref = naive_f(net, u);
      for (std::size_t i = 0; i < u.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("quasi-positivity") {
  for (const char* text : kCorpus) {
    auto rep = check_quasi_positivity(Nonlinearity::mass_action(parse_network(text)), 1000, 10.0);
    CHECK(rep.pass);
    CHECK(rep.structural);
  }
  // Sampled check on zeroed coordinates, independently verified here.
  auto rem = check_quasi_positivity(Nonlinearity::builtin("remark-1-4"), 1000, 10.0);
  CHECK(rem.pass);
  CHECK_FALSE(rem.structural);
  CHECK(rem.trials == 1000);
  for (double v : {0.0, 0.5, 3.0}) CHECK(2 * v * std::exp(v) >= 0.0);

  auto bad = Nonlinearity::custom("neg", {"x", "y"}, [](std::span<const double>, std::span<double> out) {
    out[0] = -1.0;
    out[1] = 0.0;
  });
  auto rep = check_quasi_positivity(bad, 100, 1.0);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.witness.has_value());
  REQUIRE(rep.witness_species.has_value());
  CHECK(*rep.witness_species == 0);
  CHECK((*rep.witness)[0] == 0.0);
}

TEST_CASE("dissipation classes and growth exponent") {
  CHECK(classify_dissipation(parse_network("A + B -> C @ 1")) == DissipationClass::Dissipative);
  CHECK(classify_dissipation(parse_network("A <-> B @ 1, 1")) == DissipationClass::Conservative);
  CHECK(classify_dissipation(parse_network("A -> 2 A @ 1")) == DissipationClass::Indefinite);
  CHECK(classify_dissipation(parse_network("A -> 2 A @ 1\nA -> 0 @ 1")) == DissipationClass::Indefinite);
  CHECK(to_string(DissipationClass::Dissipative) == "dissipative");

  CHECK(growth_exponent(parse_network("A + B <-> 2 B @ 1, 1")) == 2.0);
  CHECK(growth_exponent(parse_network("A -> B @ 1")) == 1.0);
  CHECK(growth_exponent(parse_network("2 A + B -> 3 C @ 1")) == 3.0);
  CHECK(growth_exponent(parse_network("A -> 0 @ 1")) == 1.0);
}

TEST_CASE("growth bound holds on random samples") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  for (const char* text : kCorpus) {
    const auto net = parse_network(text);
    const auto f = Nonlinearity::mass_action(net);
    const double mu = growth_exponent(net);
    const double m = static_cast<double>(net.species_count());
    double c = 0;
    for (const auto& r : net.reactions()) {
      double mx = 0;
      for (std::size_t i = 0; i < r.products.size(); ++i) mx = std::max(mx, std::fabs(r.products[i] - r.reactants[i]));
      c += r.rate * mx * m;
    }
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> u(net.species_count());
      double norm = 0;
      for (double& x : u) {
        x = dist(rng);
        norm += x * x;
      }
      const auto fu = f.evaluate(u);
      double fn = 0;
      for (double x : fu) fn += x * x;
      CHECK(std::sqrt(fn) <= c * (1 + std::pow(std::sqrt(norm), mu)));
    }
  }
}

TEST_CASE("conservation laws") {
  const double s2 = 1 / std::sqrt(2.0), s3 = 1 / std::sqrt(3.0);
  auto w = conservation_laws(parse_network("A <-> B @ 1, 1"));
  REQUIRE(w.rows() == 1);
  CHECK(w(0, 0) == doctest::Approx(s2));
  CHECK(w(0, 1) == doctest::Approx(s2));
  w = conservation_laws(parse_network("A + B <-> 2 B @ 1, 1"));
  REQUIRE(w.rows() == 1);
  CHECK(w(0, 0) == doctest::Approx(s2));
  w = conservation_laws(parse_network("A -> B @ 1\nB -> C @ 1\nC -> A @ 1"));
  REQUIRE(w.rows() == 1);
  for (int i = 0; i < 3; ++i) CHECK(w(0, i) == doctest::Approx(s3));
  CHECK(conservation_laws(parse_network("A -> 0 @ 1")).rows() == 0);

  // w^T f(u) = 0 for conservative networks; 1^T f <= 0 for dissipative ones.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(0.01, 5.0);
  for (const char* text : kCorpus) {
    const auto net = parse_network(text);
    const auto f = Nonlinearity::mass_action(net);
    const auto laws = conservation_laws(net);
    const auto cls = classify_dissipation(net);
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> u(net.species_count());
      for (double& x : u) x = dist(rng);
      const auto fu = f.evaluate(u);
      double fabs_sum = 0, total = 0;
      for (double x : fu) {
        fabs_sum += std::fabs(x);
        total += x;
      }
      for (Eigen::Index k = 0; k < laws.rows(); ++k) {
        double dotp = 0;
        for (std::size_t i = 0; i < fu.size(); ++i) dotp += laws(k, static_cast<Eigen::Index>(i)) * fu[i];
        CHECK(std::fabs(dotp) <= 1e-12 * (1 + fabs_sum));
      }
      if (cls == DissipationClass::Dissipative) CHECK(total <= 1e-12 * (1 + fabs_sum));
    }
  }
}

TEST_CASE("complex balance") {
  for (double c : {0.1, 1.0, 7.0})
    CHECK(check_complex_balance(parse_network("A <-> B @ 1, 1"), std::vector<double>{c, c}).balanced);
  auto rep = check_complex_balance(parse_network("A <-> B @ 2, 1"), std::vector<double>{1, 1});
  CHECK_FALSE(rep.balanced);
  REQUIRE(rep.complexes.size() == 2);
  for (std::size_t k = 0; k < rep.complexes.size(); ++k)
    if (rep.complexes[k] == std::vector<double>{1, 0}) CHECK(rep.residuals[k] == doctest::Approx(1.0));
  CHECK(check_complex_balance(parse_network("A + B <-> 2 B @ 1, 1"), std::vector<double>{1, 1}).balanced);
  CHECK(check_complex_balance(parse_network("A -> B @ 1\nB -> C @ 1\nC -> A @ 1"), std::vector<double>{2, 2, 2}).balanced);
  CHECK_THROWS_AS(check_complex_balance(parse_network("A <-> B @ 1, 1"), std::vector<double>{0, 1}), Error);
}

TEST_CASE("network constructor validation") {
  CHECK_THROWS_AS(ReactionNetwork({"A"}, {Reaction{{1}, {0}, 0.0}}), Error);
  CHECK_THROWS_AS(ReactionNetwork({"A"}, {Reaction{{0.5}, {0}, 1.0}}), Error);
  CHECK_THROWS_AS(ReactionNetwork({"A", "B"}, {Reaction{{1}, {0, 1}, 1.0}}), Error);
  CHECK_THROWS_AS(ReactionNetwork({"A"}, {Reaction{{1}, {1}, 1.0}}), Error);
  auto n = parse_network("A + B -> C @ 1");
  CHECK(n.species_index("C") == 2u);
  CHECK_FALSE(n.species_index("D").has_value());
  auto s = n.stoichiometric_matrix();
  CHECK(s(0, 0) == -1);
  CHECK(s(2, 0) == 1);
}
