#ifndef MFG_REGRET_HPP
#define MFG_REGRET_HPP

#include <vector>

#include "mfg/evaluator.hpp"
#include "mfg/game.hpp"
#include "mfg/meanfield.hpp"

namespace mfg {

// Mean field regrets of a flow with the game's terminal cost evaluated at the
// flow's terminal state distribution. `stepwise` integrates per-step one-step
// deviation gaps of the induced action kernel against the flow's state
// marginals, weighted by powers of the contraction constant; `end` compares
// the whole-game score of the induced kernel with the optimal score, both
// under the initial-distribution functional. end <= stepwise, with equality
// under the expected-sum evaluator.
struct MfRegret {
  double stepwise = 0.0;
  double end = 0.0;
  std::vector<double> per_step;
};

// The flow must satisfy the consistency identities up to consistency_tol in
// total variation; otherwise ConsistencyError.
MfRegret mf_regret(const GameSpec& game, const Evaluator& eval,
                   const MeanFieldFlow& flow, double consistency_tol = 1e-8);

// Stepwise mean field regret through an alternative route: the one-step
// score under the induced kernel is rewritten as direct integrals of the
// stage cost and of the per-pair continuation evaluation against the joint
// step distribution itself. Agrees with mf_regret().stepwise; serves as an
// internal cross-check of the induced-kernel integration.
double mf_regret_direct(const GameSpec& game, const Evaluator& eval,
                        const MeanFieldFlow& flow,
                        double consistency_tol = 1e-8);

}  // namespace mfg

#endif  // MFG_REGRET_HPP
