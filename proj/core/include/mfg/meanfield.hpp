#ifndef MFG_MEANFIELD_HPP
#define MFG_MEANFIELD_HPP

#include <vector>

#include "mfg/evaluator.hpp"
#include "mfg/game.hpp"
#include "mfg/spaces.hpp"

namespace mfg {

// Deterministic mean field flow: one joint state-action distribution per
// decision step t = 1..horizon-1. The terminal state distribution is derived
// by pushing the last joint through the transition kernel.
struct MeanFieldFlow {
  std::vector<JointDist> psi;

  int steps() const { return static_cast<int>(psi.size()); }

  bool operator==(const MeanFieldFlow&) const = default;
};

// Shape check against the game (step count, state and action cardinalities).
void validate_flow(const GameSpec& game, const MeanFieldFlow& flow);

// Next state marginal of a joint distribution at step t: the population
// argument of the kernel is psi's own state marginal.
Dist q_push(const GameSpec& game, int t, const JointDist& psi);

// One-step state law of a single agent at x mixing its actions by lambda:
// sum_a lambda(a) P_t(. | x, xi, a).
Dist q_push(const GameSpec& game, int t, int x, const Dist& xi,
            const Dist& lambda);

// State marginals xi_1..xi_T of the policy's own forward roll; equals
// flow_xis(game, roll_flow(game, policy)).
std::vector<Dist> marginal_flow(const GameSpec& game, const PolicySpec& policy);

// State marginals xi_1..xi_T induced by the flow (size horizon; the last
// entry is the pushed terminal marginal).
std::vector<Dist> flow_xis(const GameSpec& game, const MeanFieldFlow& flow);

Dist flow_terminal_xi(const GameSpec& game, const MeanFieldFlow& flow);

// Consistency residuals, one per decision step: entry 0 is the total
// variation gap between psi_1's state marginal and the game's initial
// distribution; entry t-1 is the gap between psi_t's state marginal and the
// push of psi_{t-1}. A consistent flow has all residuals 0.
std::vector<double> mff_residuals(const GameSpec& game,
                                  const MeanFieldFlow& flow);

// Max residual; convenience for tolerance checks.
double check_mff(const GameSpec& game, const MeanFieldFlow& flow);

// Rolls a policy forward from the game's initial distribution: at each step
// the joint is the current marginal composed with the policy rows evaluated
// at that marginal, and the next marginal is its push.
MeanFieldFlow roll_flow(const GameSpec& game, const PolicySpec& policy);

// Per-step conditional action rows psi_t(x, .) / xi_t(x); uniform where the
// state has zero mass, so the rows always form valid distributions.
std::vector<std::vector<Dist>> induced_rows(const MeanFieldFlow& flow);

// Backward dynamic program against a fixed population trajectory xis
// (size horizon, terminal last). values[t-1][x] is the optimal score-to-go
// from step t; the terminal layer is the terminal cost at xis.back().
// argmin[t-1][x] is the lowest-index minimizing action; a pure action always
// attains the minimum because the score is affine in the action distribution.
struct MfBackward {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<int>> argmin;
};

MfBackward mf_bellman(const GameSpec& game, const Evaluator& eval,
                      const std::vector<Dist>& xis);

// Same backward pass with the action distribution fixed to the policy's rows
// (evaluated at xis) instead of minimized.
std::vector<std::vector<double>> mf_policy_values(const GameSpec& game,
                                                  const Evaluator& eval,
                                                  const std::vector<Dist>& xis,
                                                  const PolicySpec& policy);

}  // namespace mfg

#endif  // MFG_MEANFIELD_HPP
