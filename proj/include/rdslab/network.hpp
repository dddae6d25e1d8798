#pragma once

// Reaction networks, mass-action nonlinearities and their structural checks.
//
// DSL, one reaction per line:
//
//   # comment
//   A + B -> C @ 1.0
//   A + B <-> 2 B @ 1.0, 0.5      # expands to a forward and a backward reaction
//   A -> 0 @ 0.1                  # an empty complex is written 0
//
// Species are indexed in order of first appearance. Omitted coefficients are 1.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rdslab {

struct Reaction {
  std::vector<double> reactants;  // alpha_r, one entry per species
  std::vector<double> products;   // beta_r
  double rate = 0.0;              // k_r

  bool operator==(const Reaction&) const = default;
};

class ReactionNetwork {
 public:
  // Throws Error if a rate is nonpositive, a coefficient lies in (0,1), a
  // vector has the wrong length, or a reaction has identical sides.
  ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions);

  std::size_t species_count() const noexcept { return species_.size(); }
  std::size_t reaction_count() const noexcept { return reactions_.size(); }
  const std::vector<std::string>& species() const noexcept { return species_; }
  const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
  std::optional<std::size_t> species_index(std::string_view name) const;

  // m x R matrix whose columns are beta_r - alpha_r.
  Eigen::MatrixXd stoichiometric_matrix() const;

  bool operator==(const ReactionNetwork&) const = default;

 private:
  std::vector<std::string> species_;
  std::vector<Reaction> reactions_;
};

ReactionNetwork parse_network(std::string_view text);
ReactionNetwork load_network(const std::filesystem::path& path);
// Inverse of parse_network up to formatting; reversible pairs print as two lines.
std::string format_network(const ReactionNetwork& network);

// u^alpha with 0^0 = 1. Fractional exponents see max(u_i, 0).
double monomial(std::span<const double> u, std::span<const double> exponents);

// Sum of weighted integrals sum_i int phi_i(u_i) dx used as a declared
// Lyapunov diagnostic for builtin nonlinearities.
enum class LyapunovTerm { HalfSquare, Absolute };

struct LyapunovHint {
  std::string description;
  std::vector<LyapunovTerm> terms;  // one per species
};

class Nonlinearity {
 public:
  using Function = std::function<void(std::span<const double> u, std::span<double> out)>;

  static Nonlinearity mass_action(ReactionNetwork network);
  // Catalog: "remark-1-4". Throws ConfigError for unknown names.
  static Nonlinearity builtin(std::string_view name);
  static std::vector<std::string> builtin_names();
  // A builtin-kind nonlinearity from an arbitrary function (tests, experiments).
  static Nonlinearity custom(std::string name, std::vector<std::string> species, Function f,
                             std::optional<LyapunovHint> hint = std::nullopt);

  std::size_t species_count() const noexcept;
  const std::vector<std::string>& species() const noexcept;
  const std::string& name() const noexcept;
  bool is_mass_action() const noexcept;
  // Throws Error for builtin nonlinearities.
  const ReactionNetwork& network() const;
  const std::optional<LyapunovHint>& lyapunov_hint() const noexcept;

  // f(u). Throws Error on dimension mismatch.
  void evaluate(std::span<const double> u, std::span<double> out) const;
  std::vector<double> evaluate(std::span<const double> u) const;

  // Nodewise f over species-major fields u[i][x]; out is resized as needed.
  void evaluate_fields(const std::vector<std::vector<double>>& u,
                       std::vector<std::vector<double>>& out) const;

 private:
  struct Builtin {
    std::string name;
    std::vector<std::string> species;
    Function f;
    std::optional<LyapunovHint> hint;
  };
  explicit Nonlinearity(std::variant<ReactionNetwork, Builtin> impl);

  std::variant<ReactionNetwork, Builtin> impl_;
  std::string name_;
  std::optional<LyapunovHint> hint_;
};

struct QuasiPositivityReport {
  bool pass = true;
  bool structural = false;            // decided from stoichiometry, no sampling
  std::size_t trials = 0;
  std::optional<std::vector<double>> witness;
  std::optional<std::size_t> witness_species;
};

QuasiPositivityReport check_quasi_positivity(const Nonlinearity& f, std::size_t trials,
                                             double box, std::uint64_t seed = 7);

enum class DissipationClass { Conservative, Dissipative, Indefinite };
std::string_view to_string(DissipationClass c);

DissipationClass classify_dissipation(const ReactionNetwork& network);

// mu = max_r max(|alpha_r|_1, |beta_r|_1), at least 1.
double growth_exponent(const ReactionNetwork& network);

// Orthonormal rows spanning the left kernel of the stoichiometric matrix.
// Each row is sign-normalised so that its first nonzero entry is positive.
Eigen::MatrixXd conservation_laws(const ReactionNetwork& network);

struct ComplexBalanceReport {
  bool balanced = false;
  std::vector<std::vector<double>> complexes;
  std::vector<double> residuals;  // outflow - inflow per complex
  double scale = 1.0;             // largest reaction flow, 1 if all vanish
};

// Throws Error if u has a nonpositive component.
ComplexBalanceReport check_complex_balance(const ReactionNetwork& network,
                                           std::span<const double> u, double rel_tol = 1e-12);

}  // namespace rdslab
