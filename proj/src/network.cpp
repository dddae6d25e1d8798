#include "rdslab/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

#include "rdslab/error.hpp"
#include "rdslab/kernels.hpp"

namespace rdslab {

namespace {

bool valid_coefficient(double c) { return c == 0.0 || c >= 1.0; }

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool is_integer_exponent(double a) { return a == std::floor(a) && a <= 64.0; }

}  // namespace

// ---------------------------------------------------------------------------
// ReactionNetwork

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions)
    : species_(std::move(species)), reactions_(std::move(reactions)) {
  const std::size_t m = species_.size();
  for (std::size_t r = 0; r < reactions_.size(); ++r) {
    const Reaction& rx = reactions_[r];
    const std::string where = "reaction " + std::to_string(r + 1) + ": ";
    if (rx.reactants.size() != m || rx.products.size() != m)
      throw Error(where + "stoichiometric vector length does not match species count");
    if (!(rx.rate > 0.0) || !std::isfinite(rx.rate))
      throw Error(where + "rate constant must be positive and finite");
    for (std::size_t i = 0; i < m; ++i) {
      if (!valid_coefficient(rx.reactants[i]) || !valid_coefficient(rx.products[i]))
        throw Error(where + "stoichiometric coefficient must be 0 or >= 1");
    }
    if (rx.reactants == rx.products) throw Error(where + "reactant and product complexes coincide");
  }
}

std::optional<std::size_t> ReactionNetwork::species_index(std::string_view name) const {
  const auto it = std::find(species_.begin(), species_.end(), name);
  if (it == species_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - species_.begin());
}

Eigen::MatrixXd ReactionNetwork::stoichiometric_matrix() const {
  Eigen::MatrixXd s(species_count(), reaction_count());
  for (std::size_t r = 0; r < reactions_.size(); ++r)
    for (std::size_t i = 0; i < species_.size(); ++i)
      s(i, r) = reactions_[r].products[i] - reactions_[r].reactants[i];
  return s;
}

// ---------------------------------------------------------------------------
// DSL

namespace {

using Side = std::map<std::size_t, double>;

struct SpeciesTable {
  std::vector<std::string> names;
  std::size_t intern(const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
    names.push_back(name);
    return names.size() - 1;
  }
};

double parse_real(std::string_view text, std::size_t line, const char* what) {
  const std::string s(trim(text));
  if (s.empty()) throw ParseError(line, std::string("missing ") + what);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v))
    throw ParseError(line, std::string("malformed ") + what + " '" + s + "'");
  return v;
}

Side parse_side(std::string_view text, std::size_t line, SpeciesTable& table) {
  static const std::regex term_re(
      R"(^(([0-9]+\.?[0-9]*|\.[0-9]+)([eE][-+]?[0-9]+)?)?\s*([A-Za-z_][A-Za-z0-9_]*)$)");
  Side side;
  const std::string_view body = trim(text);
  if (body.empty()) throw ParseError(line, "empty complex (write 0 for the empty complex)");
  if (body == "0") return side;

  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t plus = body.find('+', pos);
    const std::string term(trim(body.substr(pos, plus == std::string_view::npos ? plus : plus - pos)));
    if (term.empty()) throw ParseError(line, "empty term in complex '" + std::string(body) + "'");
    std::smatch match;
    if (!std::regex_match(term, match, term_re))
      throw ParseError(line, "malformed term '" + term + "'");
    double coeff = 1.0;
    if (match[1].matched) {
      coeff = std::strtod(match[1].str().c_str(), nullptr);
      if (coeff == 0.0) throw ParseError(line, "zero coefficient in term '" + term + "'");
      if (coeff < 1.0) throw ParseError(line, "coefficient in (0,1) in term '" + term + "'");
    }
    side[table.intern(match[4].str())] += coeff;
    if (plus == std::string_view::npos) break;
    pos = plus + 1;
  }
  return side;
}

struct PendingReaction {
  Side reactants;
  Side products;
  double rate;
  std::size_t line;
};

}  // namespace

ReactionNetwork parse_network(std::string_view text) {
  SpeciesTable table;
  std::vector<PendingReaction> pending;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto at = line.find('@');
    if (at == std::string_view::npos) throw ParseError(line_no, "missing '@ rate'");
    const std::string_view equation = line.substr(0, at);
    const std::string_view rates = line.substr(at + 1);

    bool reversible = false;
    std::size_t arrow = equation.find("<->");
    std::size_t arrow_len = 3;
    if (arrow != std::string_view::npos) {
      reversible = true;
    } else {
      arrow = equation.find("->");
      arrow_len = 2;
      if (arrow == std::string_view::npos) throw ParseError(line_no, "missing '->' or '<->'");
    }
    const std::string_view rhs_text = equation.substr(arrow + arrow_len);
    if (rhs_text.find("->") != std::string_view::npos)
      throw ParseError(line_no, "more than one arrow");

    Side lhs = parse_side(equation.substr(0, arrow), line_no, table);
    Side rhs = parse_side(rhs_text, line_no, table);

    std::vector<double> k;
    std::size_t rpos = 0;
    while (true) {
      const std::size_t comma = rates.find(',', rpos);
      k.push_back(parse_real(rates.substr(rpos, comma == std::string_view::npos ? comma : comma - rpos),
                             line_no, "rate constant"));
      if (comma == std::string_view::npos) break;
      rpos = comma + 1;
    }
    const std::size_t expected = reversible ? 2 : 1;
    if (k.size() != expected)
      throw ParseError(line_no, reversible ? "reversible reaction needs two rates 'kf, kb'"
                                           : "irreversible reaction needs exactly one rate");
    for (double v : k)
      if (!(v > 0.0)) throw ParseError(line_no, "rate constant must be positive");
    if (lhs == rhs) throw ParseError(line_no, "reactant and product complexes coincide");

    pending.push_back({lhs, rhs, k[0], line_no});
    if (reversible) pending.push_back({rhs, lhs, k[1], line_no});
  }

  const std::size_t m = table.names.size();
  std::vector<Reaction> reactions;
  reactions.reserve(pending.size());
  for (const PendingReaction& p : pending) {
    Reaction rx{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), p.rate};
    for (const auto& [i, c] : p.reactants) rx.reactants[i] = c;
    for (const auto& [i, c] : p.products) rx.products[i] = c;
    reactions.push_back(std::move(rx));
  }
  try {
    return ReactionNetwork(std::move(table.names), std::move(reactions));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_no, e.what());
  }
}

ReactionNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open network file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

std::string format_network(const ReactionNetwork& network) {
  const auto& names = network.species();
  auto side = [&](const std::vector<double>& coeffs) {
    std::string out;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (coeffs[i] == 0.0) continue;
      if (!out.empty()) out += " + ";
      if (coeffs[i] != 1.0) out += format_number(coeffs[i]) + " ";
      out += names[i];
    }
    return out.empty() ? std::string("0") : out;
  };
  std::string text;
  for (const Reaction& rx : network.reactions())
    text += side(rx.reactants) + " -> " + side(rx.products) + " @ " + format_number(rx.rate) + "\n";
  return text;
}

double monomial(std::span<const double> u, std::span<const double> exponents) {
  double value = 1.0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    const double a = exponents[i];
    if (a == 0.0) continue;
    if (is_integer_exponent(a)) {
      for (int p = 0; p < static_cast<int>(a); ++p) value *= u[i];
    } else {
      value *= std::pow(std::max(u[i], 0.0), a);
    }
  }
  return value;
}

// ---------------------------------------------------------------------------
// Nonlinearity

namespace {

// (-u + 2v) e^v - u v e^{u^2},  -v^2 e^v + u^2 v e^{u^2}
void exponential_pair(std::span<const double> z, std::span<double> out) {
  const double u = z[0];
  const double v = z[1];
  const double ev = std::exp(v);
  const double eu2 = std::exp(u * u);
  out[0] = (-u + 2.0 * v) * ev - u * v * eu2;
  out[1] = -v * v * ev + u * u * v * eu2;
}

}  // namespace

Nonlinearity::Nonlinearity(std::variant<ReactionNetwork, Builtin> impl) : impl_(std::move(impl)) {
  if (const auto* b = std::get_if<Builtin>(&impl_)) {
    name_ = b->name;
    hint_ = b->hint;
  } else {
    name_ = "mass-action";
  }
}

Nonlinearity Nonlinearity::mass_action(ReactionNetwork network) {
  return Nonlinearity(std::move(network));
}

std::vector<std::string> Nonlinearity::builtin_names() { return {"remark-1-4"}; }

Nonlinearity Nonlinearity::builtin(std::string_view name) {
  if (name == "remark-1-4") {
    return Nonlinearity(Builtin{
        "remark-1-4",
        {"u", "v"},
        exponential_pair,
        LyapunovHint{"0.5*|u|_2^2 + |v|_1", {LyapunovTerm::HalfSquare, LyapunovTerm::Absolute}}});
  }
  std::string known;
  for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown builtin nonlinearity '" + std::string(name) + "' (known: " + known + ")");
}

Nonlinearity Nonlinearity::custom(std::string name, std::vector<std::string> species, Function f,
                                  std::optional<LyapunovHint> hint) {
  return Nonlinearity(Builtin{std::move(name), std::move(species), std::move(f), std::move(hint)});
}

std::size_t Nonlinearity::species_count() const noexcept { return species().size(); }

const std::vector<std::string>& Nonlinearity::species() const noexcept {
  if (const auto* net = std::get_if<ReactionNetwork>(&impl_)) return net->species();
  return std::get<Builtin>(impl_).species;
}

const std::string& Nonlinearity::name() const noexcept { return name_; }

bool Nonlinearity::is_mass_action() const noexcept {
  return std::holds_alternative<ReactionNetwork>(impl_);
}

const ReactionNetwork& Nonlinearity::network() const {
  if (const auto* net = std::get_if<ReactionNetwork>(&impl_)) return *net;
  throw Error("nonlinearity '" + name_ + "' is not a mass-action network");
}

const std::optional<LyapunovHint>& Nonlinearity::lyapunov_hint() const noexcept { return hint_; }

void Nonlinearity::evaluate(std::span<const double> u, std::span<double> out) const {
  const std::size_t m = species_count();
  if (u.size() != m || out.size() != m)
    throw Error("state dimension " + std::to_string(u.size()) + " does not match " +
                std::to_string(m) + " species");
  if (const auto* net = std::get_if<ReactionNetwork>(&impl_)) {
    std::fill(out.begin(), out.end(), 0.0);
    for (const Reaction& rx : net->reactions()) {
      double flow = rx.rate;
      flow *= monomial(u, rx.reactants);
      for (std::size_t i = 0; i < m; ++i) {
        const double change = rx.products[i] - rx.reactants[i];
        if (change != 0.0) out[i] += change * flow;
      }
    }
  } else {
    std::get<Builtin>(impl_).f(u, out);
  }
}

std::vector<double> Nonlinearity::evaluate(std::span<const double> u) const {
  std::vector<double> out(species_count());
  evaluate(u, out);
  return out;
}

void Nonlinearity::evaluate_fields(const std::vector<std::vector<double>>& u,
                                   std::vector<std::vector<double>>& out) const {
  const std::size_t m = species_count();
  if (u.size() != m) throw Error("field species count does not match nonlinearity");
  const std::size_t nodes = m == 0 ? 0 : u[0].size();
  out.resize(m);
  for (auto& o : out) o.assign(nodes, 0.0);

  if (const auto* net = std::get_if<ReactionNetwork>(&impl_)) {
    // Vectorised over nodes, same operation order as evaluate().
    std::vector<double> flow(nodes);
    for (const Reaction& rx : net->reactions()) {
      std::fill(flow.begin(), flow.end(), rx.rate);
      std::vector<double> mono(nodes, 1.0);
      for (std::size_t i = 0; i < m; ++i) {
        const double a = rx.reactants[i];
        if (a == 0.0) continue;
        if (is_integer_exponent(a)) {
          for (int p = 0; p < static_cast<int>(a); ++p) kernels::mul(u[i], mono);
        } else {
          for (std::size_t x = 0; x < nodes; ++x) mono[x] *= std::pow(std::max(u[i][x], 0.0), a);
        }
      }
      kernels::mul(mono, flow);
      for (std::size_t i = 0; i < m; ++i) {
        const double change = rx.products[i] - rx.reactants[i];
        if (change != 0.0) kernels::axpy(change, flow, out[i]);
      }
    }
    return;
  }

  std::vector<double> point(m), value(m);
  const auto& f = std::get<Builtin>(impl_).f;
  for (std::size_t x = 0; x < nodes; ++x) {
    for (std::size_t i = 0; i < m; ++i) point[i] = u[i][x];
    f(point, value);
    for (std::size_t i = 0; i < m; ++i) out[i][x] = value[i];
  }
}

// ---------------------------------------------------------------------------
// Structural checks

QuasiPositivityReport check_quasi_positivity(const Nonlinearity& f, std::size_t trials, double box,
                                             std::uint64_t seed) {
  QuasiPositivityReport report;
  if (f.is_mass_action()) {
    // A negative change beta_i - alpha_i < 0 forces alpha_i >= 1, so the
    // corresponding monomial carries u_i and vanishes on {u_i = 0}.
    report.structural = true;
    for (const Reaction& rx : f.network().reactions())
      for (std::size_t i = 0; i < rx.reactants.size(); ++i)
        if (rx.products[i] < rx.reactants[i] && rx.reactants[i] < 1.0) report.pass = false;
    return report;
  }

  const std::size_t m = f.species_count();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, box);
  std::vector<double> z(m), value(m);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t i = t % m;
    for (double& c : z) c = coord(rng);
    z[i] = 0.0;
    f.evaluate(z, value);
    ++report.trials;
    if (value[i] < 0.0) {
      report.pass = false;
      report.witness = z;
      report.witness_species = i;
      break;
    }
  }
  return report;
}

std::string_view to_string(DissipationClass c) {
  switch (c) {
    case DissipationClass::Conservative: return "conservative";
    case DissipationClass::Dissipative: return "dissipative";
    case DissipationClass::Indefinite: return "indefinite";
  }
  return "indefinite";
}

DissipationClass classify_dissipation(const ReactionNetwork& network) {
  constexpr double tol = 1e-12;
  bool strict = false;
  for (const Reaction& rx : network.reactions()) {
    double change = 0.0;
    for (std::size_t i = 0; i < rx.reactants.size(); ++i) change += rx.products[i] - rx.reactants[i];
    if (change > tol) return DissipationClass::Indefinite;
    if (change < -tol) strict = true;
  }
  return strict ? DissipationClass::Dissipative : DissipationClass::Conservative;
}

double growth_exponent(const ReactionNetwork& network) {
  double mu = 1.0;
  for (const Reaction& rx : network.reactions()) {
    double in = 0.0, out = 0.0;
    for (std::size_t i = 0; i < rx.reactants.size(); ++i) {
      in += rx.reactants[i];
      out += rx.products[i];
    }
    mu = std::max({mu, in, out});
  }
  return mu;
}

Eigen::MatrixXd conservation_laws(const ReactionNetwork& network) {
  const Eigen::Index m = static_cast<Eigen::Index>(network.species_count());
  if (network.reaction_count() == 0) return Eigen::MatrixXd::Identity(m, m);

  const Eigen::MatrixXd st = network.stoichiometric_matrix().transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(st, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = sv.size() > 0 ? std::max(st.rows(), st.cols()) * sv(0) * 1e-13 : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > tol) ++rank;

  Eigen::MatrixXd basis = svd.matrixV().rightCols(m - rank).transpose();
  for (Eigen::Index r = 0; r < basis.rows(); ++r) {
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
      if (std::abs(basis(r, c)) > 1e-12) {
        if (basis(r, c) < 0.0) basis.row(r) *= -1.0;
        break;
      }
    }
  }
  return basis;
}

ComplexBalanceReport check_complex_balance(const ReactionNetwork& network, std::span<const double> u,
                                           double rel_tol) {
  if (u.size() != network.species_count()) throw Error("state dimension does not match network");
  for (double v : u)
    if (!(v > 0.0)) throw Error("complex balance is checked at positive states only");

  ComplexBalanceReport report;
  auto index_of = [&](const std::vector<double>& y) {
    const auto it = std::find(report.complexes.begin(), report.complexes.end(), y);
    if (it != report.complexes.end()) return static_cast<std::size_t>(it - report.complexes.begin());
    report.complexes.push_back(y);
    report.residuals.push_back(0.0);
    return report.complexes.size() - 1;
  };

  double scale = 0.0;
  for (const Reaction& rx : network.reactions()) {
    const double flow = rx.rate * monomial(u, rx.reactants);
    scale = std::max(scale, flow);
    report.residuals[index_of(rx.reactants)] += flow;
    report.residuals[index_of(rx.products)] -= flow;
  }
  report.scale = scale > 0.0 ? scale : 1.0;
  report.balanced = std::all_of(report.residuals.begin(), report.residuals.end(),
                                [&](double r) { return std::abs(r) <= rel_tol * report.scale; });
  return report;
}

}  // namespace rdslab
