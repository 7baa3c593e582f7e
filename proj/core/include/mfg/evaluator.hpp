#ifndef MFG_EVALUATOR_HPP
#define MFG_EVALUATOR_HPP

#include <span>
#include <vector>

#include "mfg/game.hpp"
#include "mfg/moduli.hpp"
#include "mfg/spaces.hpp"

namespace mfg {

// Risk evaluation bound to a game: the one-step scoring operator plus the
// constants and composed continuity modulus that feed every error budget.
//
// Effective constants dominate the declared ones so the budget displays stay
// valid bounds:
//   C0   >= max(1, declared C0); the >= 1 normalization is what lets a single
//           modulus cover both the cost term and the value term below.
//   Cbar >= declared, and >= 1 (expected sum) or 1/kappa (AVaR), the one-step
//           sup-norm contraction factor of the operator.
//   C1   >= max(declared, 2*Cbar, 1), the factor on ||v|| in both the growth
//           bound ||G v|| <= C0 + C1 ||v|| and the continuity bound below.
//
// The composed modulus zeta controls the operator's joint continuity in the
// population measure and the action distribution,
//   |G^lambda_xi v - G^lambda'_xi' v|
//     <= (C0 + C1 ||v||) (zeta(bl(xi, xi')) + zeta(bl(lambda, lambda'))),
// and is built from zeta_hat = zeta_decl + eta (cost modulus plus kernel
// modulus) by the Lipschitz smoothing construction
//   zeta(ell) = max( zeta_hat(ell),
//                    2 * inf over L > 1 + zeta_hat(2/L) of
//                        { L * ell + zeta_hat(2/L) } ).
// The max keeps zeta a valid modulus for the population argument even when
// the declared caps are large; both branches are subadditive.
struct Evaluator {
  EvaluatorSpec::Kind kind = EvaluatorSpec::Kind::expected_sum;
  double kappa = 1.0;
  double C0 = 1.0;
  double C1 = 1.0;
  double Cbar = 1.0;
  Modulus zeta_decl;
  Modulus eta;

  static Evaluator from_game(const GameSpec& game);

  double zeta_hat(double ell) const { return zeta_decl(ell) + eta(ell); }
  double zeta(double ell) const;
};

// Exact AVaR_kappa of a finite value distribution:
//   min over q of { q + (1/kappa) * sum_i p_i * max(v_i - q, 0) }.
// The objective is piecewise linear in q with breakpoints at the atoms, so
// the minimum is attained at an atom and found by a sorted suffix-sum walk.
double avar_value(double kappa, const std::vector<double>& values,
                  const std::vector<double>& probs);

// Same walk with the atoms already sorted ascending; probs aligned to values.
// Lets callers that score many distributions over one value table presort it.
double avar_sorted(double kappa, std::span<const double> values_sorted,
                   std::span<const double> probs);

// One-step score G^lambda_{t,xi} v(x): the stage cost integrated against the
// action distribution plus, per action, the evaluation of the continuation
// values under the transition law (expectation or AVaR by evaluator kind),
// also integrated against the action distribution.
double mf_score(const GameSpec& game, const Evaluator& eval, int t, int x,
                const Dist& xi, const Dist& lambda,
                const std::vector<double>& v);

}  // namespace mfg

#endif  // MFG_EVALUATOR_HPP
