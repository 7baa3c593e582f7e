#ifndef MFG_LIFT_HPP
#define MFG_LIFT_HPP

#include <cstdint>
#include <vector>

#include "mfg/evaluator.hpp"
#include "mfg/game.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/moduli.hpp"
#include "mfg/spaces.hpp"

namespace mfg {

// Lifts an N-player policy profile to a mean field flow. Starting from the
// game's initial law, each player's state law evolves under its own policy,
// but with both the policy and the kernel reading the averaged trajectory:
//   xi_1 = initial,   mu^n_1 = initial,
//   mu^n_{t+1}(y) = sum_{x,a} mu^n_t(x) pi^n_t(x, xi_t)(a) P_t(y | x, xi_t, a),
//   xi_{t+1} = (1/N) sum_n mu^n_{t+1},
// and the lifted joints are psi_t(x,a) = (1/N) sum_n mu^n_t(x) pi^n_t(x, xi_t)(a).
// The result is always a consistent mean field flow with marginals xi_t, and
// for a homogeneous profile it does not depend on the number of players.
MeanFieldFlow lift_flow(const GameSpec& game, const PolicyProfile& profile);

// A single modulus dominating every policy's declared symmetric-continuity
// modulus pointwise on [0, 1]. Budget recursions only ever evaluate it on
// deviation bounds clamped at 1, where the domination is exact: any infinite
// member wins, otherwise the largest constant, smallest exponent and largest
// cap do.
Modulus profile_theta(const PolicyProfile& profile);

// Expected BL deviation of the empirical measure of n iid samples from their
// common law, uniform over that law: the minimum over grid resolutions
// j = 1..j_max of
//   1/(2j) + sqrt(pi) * cover(j) / sqrt(2n),
// clamped at 1 (BL distances on a normalized space never exceed 1), where
// cover(j) is a certified count of 1/j sup-balls covering the unit BL ball.
// Beyond 8 points, or when the enumeration would be too costly, the count
// falls back to the unpruned per-point grid bound j^size, which only loosens
// the rate.
double concentration_rate(const FiniteMetricSpace& space, std::int64_t n,
                          int j_max = 64);

// Same minimum along with the resolution attaining it; j = 0 records that no
// resolution beat the clamp at 1.
struct RateDetail {
  double rate = 1.0;
  int j = 0;
};

RateDetail concentration_rate_detail(const FiniteMetricSpace& space,
                                     std::int64_t n, int j_max = 64);

// Sup-norm growth of score-to-go over r steps: z mapped r times through
// w -> C0 + C1 * w. Iterating from the terminal bound z gives the constant
// multiplying continuity moduli in the budgets below.
double growth_bound(const Evaluator& eval, int r, double z);

// Non-asymptotic budget tying an N-player game to its mean field lift. The
// deviation sequences (rates and e entries) live on the normalized BL scale
// and are clamped at 1, where they are vacuous but still valid. The derived
// bounds (flow_gap and the transfers) are evaluated verbatim instead: they
// may exceed 1 and become +inf when a declared modulus is the infinite
// marker, so discontinuous data degrades the guarantee instead of erroring.
struct ErrorBudget {
  std::int64_t n_players = 0;

  // Empirical-measure rates on the state space and on the state x action
  // product (sum metric).
  double r_state = 1.0;
  double r_joint = 1.0;

  // e[t-1] bounds the expected BL gap at step t between the empirical state
  // measure under the profile and the lifted flow's marginal. The recursion
  // charges the policy feedback through a Lipschitz smoothing infimum:
  //   e_1 = r_state,
  //   e_t = 2 inf_{L > 1 + eta(2/L)} { sum_{r<t} (L theta(e_r) + eta(e_r))
  //                                    + eta(2/L) }  + t/N + r_state.
  std::vector<double> e;

  // Same bound when every player replays a fixed flow's induced policy, so
  // the policy argument carries no population feedback:
  //   e_1 = r_state,   e_t = 2 sum_{r<t} eta(e_r) + t/N + r_state.
  std::vector<double> e_induced;

  // Per decision step, bound on the expected BL gap between the empirical
  // state-action measure under the profile and the lifted joint:
  //   2 theta(e_t) + (3/2) e_t + r_joint - r_state.
  std::vector<double> flow_gap;

  // Bound on the gap between the average per-player stepwise regret and the
  // stepwise regret of the lifted flow. One-sided in general (the lifted
  // regret never exceeds the player average by more than this); two-sided
  // when the score operator adds constants exactly, as expected sums do.
  double regret_transfer = kInf;

  // Bounds for the reverse construction: N players all replaying a
  // consistent flow's induced policy. Stepwise and end regrets of each
  // player then match the flow's regrets up to these budgets.
  double induced_transfer = kInf;
  double induced_end_transfer = kInf;
};

// Evaluates the budget for N players driven by policies whose declared
// symmetric-continuity modulus is dominated by theta (see profile_theta).
// The induced_* fields do not depend on theta.
ErrorBudget error_budget(const GameSpec& game, const Evaluator& eval,
                         std::int64_t n_players, const Modulus& theta);

}  // namespace mfg

#endif  // MFG_LIFT_HPP
