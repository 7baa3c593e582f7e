#ifndef MFG_MFE_HPP
#define MFG_MFE_HPP

#include <cstdint>

#include "mfg/evaluator.hpp"
#include "mfg/game.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/moduli.hpp"

namespace mfg {

// One best-response application: freeze the input flow's marginals, run the
// backward program against them (terminal cost at the pushed terminal
// marginal), and roll the greedy action table forward from the initial law.
// Ties break to the lowest action index. The returned flow is consistent by
// construction and supported on the argmin sets of the backward values; the
// integrated optimality residual is checked to 1e-10 and a ConsistencyError
// is thrown past it. The input flow must be consistent (residual <= 1e-8).
MeanFieldFlow best_response_flow(const GameSpec& game, const Evaluator& eval,
                                 const MeanFieldFlow& flow);

struct SolveOptions {
  double tol = 1e-8;       // regret certifying convergence
  int max_iter = 500;      // best-response iterations per restart
  double damping = 0.2;    // weight on the best response when mixing, in (0, 1]
  int restarts = 1;        // independent seeded starts
  std::uint64_t seed = 0;  // master seed for the random starts
};

struct SolveReport {
  MeanFieldFlow flow;
  double mfr = kInf;    // fresh regret of the reported flow, never a stale copy
  int iterations = 0;   // iterations used by the winning restart
  double damping = 0.0;
  int restarts_used = 0;
  bool converged = false;  // implies mfr <= the requested tolerance
};

// Damped fictitious play over mean field flows. Each restart rolls a random
// oblivious policy into a starting flow, then repeats: certify the current
// iterate and the fresh best response by their regrets, stop when either
// meets tol, otherwise mix the joints with weight `damping` on the best
// response and restore consistency by re-rolling the mixed induced rows.
// Regret is not monotone along the iterates (fictitious play may oscillate),
// so the best flow seen is tracked and reported on non-convergence. Restarts
// are merged by (regret, restart index); the whole run is deterministic given
// the seed. The reported regret is always re-evaluated on the returned flow
// at consistency tolerance 1e-12.
SolveReport solve_mfe(const GameSpec& game, const Evaluator& eval,
                      const SolveOptions& opts = {});

}  // namespace mfg

#endif  // MFG_MFE_HPP
