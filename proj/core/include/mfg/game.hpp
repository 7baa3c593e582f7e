#ifndef MFG_GAME_HPP
#define MFG_GAME_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfg/moduli.hpp"
#include "mfg/spaces.hpp"

namespace mfg {

// Which one-step evaluation operator scores continuation values.
struct EvaluatorSpec {
  enum class Kind { expected_sum, avar };
  Kind kind = Kind::expected_sum;
  double kappa = 1.0;  // avar level in (0, 1]; ignored for expected_sum

  bool operator==(const EvaluatorSpec&) const = default;
};

// Transition kernel family P_t(x, xi, a). Time is 1-based: t in 1..T-1.
// Tables are stored per step, indexed [t-1][x*na + a], each entry a Dist over
// states. table_affine mixes two tables with a clamped affine weight in xi,
// which keeps every row a valid Dist for every xi in the simplex.
struct TransitionFamily {
  enum class Kind { xi_independent, table_affine, plugin };
  Kind kind = Kind::xi_independent;
  std::vector<std::vector<Dist>> table;     // xi_independent rows, or the w=0 table
  std::vector<std::vector<Dist>> table_hi;  // table_affine w=1 table
  double w0 = 0.0;                          // weight offset
  std::vector<double> w_coef;               // per-state weight coefficients
  std::function<Dist(int, int, const Dist&, int)> fn;  // plugin(t, x, xi, a)

  bool operator==(const TransitionFamily& o) const {
    return kind == o.kind && table == o.table && table_hi == o.table_hi && w0 == o.w0 &&
           w_coef == o.w_coef;
  }
};

// Running cost c_t(x, xi, a) = base[t-1][x*na+a] + sum_y mix[t-1][x*na+a][y] xi(y).
// mix empty means xi-independent cost.
struct CostFamily {
  std::vector<std::vector<double>> base;
  std::vector<std::vector<std::vector<double>>> mix;

  bool operator==(const CostFamily&) const = default;
};

// Terminal value V(x, xi) = base[x] + sum_y mix[x][y] xi(y).
struct TerminalFamily {
  std::vector<double> base;
  std::vector<std::vector<double>> mix;

  bool operator==(const TerminalFamily&) const = default;
};

// A symmetric Markovian policy: an action distribution per (t, x, xi).
// threshold switches between two oblivious tables on the mass xi(watch),
// which is deliberately discontinuous in xi (its modulus is the infinite
// marker). logit_meanfield is the smooth family with a derivable modulus.
struct PolicySpec {
  enum class Kind { oblivious_table, logit_meanfield, threshold, plugin };
  Kind kind = Kind::oblivious_table;
  std::string name = "policy";

  std::vector<std::vector<Dist>> table;  // oblivious rows [t-1][x], Dist over actions

  // logit weights: exp(coef_feat*phi[x][a] + coef_mix*sum_y mix[a][y] xi(y))
  double coef_feat = 0.0;
  double coef_mix = 0.0;
  std::vector<std::vector<double>> phi;  // [x][a]
  std::vector<std::vector<double>> mix;  // [a][y]

  int watch = 0;        // threshold: state index whose mass is compared
  double cutoff = 0.0;  // threshold: use lo when xi(watch) <= cutoff, else hi
  std::vector<std::vector<Dist>> lo, hi;

  std::function<Dist(int, int, const Dist&)> fn;  // plugin(t, x, xi)

  Modulus vartheta = infinite_modulus();  // declared symmetric-continuity modulus

  bool operator==(const PolicySpec& o) const {
    return kind == o.kind && name == o.name && table == o.table && coef_feat == o.coef_feat &&
           coef_mix == o.coef_mix && phi == o.phi && mix == o.mix && watch == o.watch &&
           cutoff == o.cutoff && lo == o.lo && hi == o.hi && vartheta == o.vartheta;
  }
};

// One policy per player; heterogeneous profiles allowed.
struct PolicyProfile {
  std::vector<PolicySpec> policies;

  PolicyProfile() = default;
  explicit PolicyProfile(std::vector<PolicySpec> ps) : policies(std::move(ps)) {}
  PolicyProfile(const PolicySpec& p, int n) : policies(static_cast<std::size_t>(n), p) {}

  int size() const { return static_cast<int>(policies.size()); }
  const PolicySpec& operator[](int n) const { return policies[static_cast<std::size_t>(n)]; }
};

// Declared continuity moduli and growth constants. eta bounds the kernel's TV
// continuity, theta the bundled policy's continuity, iota the terminal's, and
// zeta the score operator's. C0/C1/Cbar are resolved at load time (cost bound,
// value growth, evaluator contraction).
struct ModuliSpec {
  Modulus eta = zero_modulus();
  Modulus theta = zero_modulus();
  Modulus iota = zero_modulus();
  Modulus zeta = zero_modulus();
  double C0 = 0.0;
  double C1 = 1.0;
  double Cbar = 1.0;

  bool operator==(const ModuliSpec&) const = default;
};

struct GameSpec {
  std::string name = "custom";
  int horizon = 2;  // T; running steps are t = 1..T-1, terminal at T
  FiniteMetricSpace states;
  FiniteMetricSpace actions;
  Dist initial;  // law of every player's first state
  TransitionFamily transition;
  CostFamily cost;
  TerminalFamily terminal;
  EvaluatorSpec evaluator;
  ModuliSpec moduli;
  std::optional<PolicySpec> policy;  // bundled reference policy, if any

  bool operator==(const GameSpec& o) const {
    return name == o.name && horizon == o.horizon && states == o.states &&
           actions == o.actions && initial == o.initial && transition == o.transition &&
           cost == o.cost && terminal == o.terminal && evaluator == o.evaluator &&
           moduli == o.moduli && policy == o.policy;
  }
};

// Parse and validate a JSON config (schema documented in the README).
// Throws ValidationError with the offending field on any violation.
GameSpec load_game(const std::string& config_text);

// Built-in games by name; throws ValidationError for unknown names.
GameSpec builtin_game(const std::string& name);
const std::vector<std::string>& builtin_names();

// JSON text that load_game parses back to an equal GameSpec. Plugin kinds
// cannot be serialized and raise ValidationError.
std::string serialize_game(const GameSpec& game);

// Eager validation of every exactly checkable invariant: dimensions,
// stochastic rows at all simplex vertices, cost within the declared C0,
// growth constants at least the evaluator's. Declared continuity moduli are
// audited by sampling (tests and the validate subcommand), not here.
void validate_game(const GameSpec& game);

Dist transition_dist(const GameSpec& game, int t, int x, const Dist& xi, int a);
double cost_value(const GameSpec& game, int t, int x, const Dist& xi, int a);
std::vector<double> terminal_vector(const GameSpec& game, const Dist& xi_T);
Dist policy_dist(const PolicySpec& policy, int t, int x, const Dist& xi);

void validate_policy(const GameSpec& game, const PolicySpec& policy);

// Exact sups over simplex vertices (affine families attain them there).
double cost_sup(const GameSpec& game);
double terminal_sup(const GameSpec& game);

}  // namespace mfg

#endif  // MFG_GAME_HPP
