#ifndef MFG_NPLAYER_HPP
#define MFG_NPLAYER_HPP

#include <cstdint>
#include <vector>

#include "mfg/evaluator.hpp"
#include "mfg/game.hpp"

namespace mfg {

// Row-major indexer for joint states with player 1 as the leading digit.
// Guards the dense product representation behind a hard capacity cap.
struct ProductIndexer {
  int states = 0;
  int players = 0;
  std::int64_t total = 0;

  static constexpr std::int64_t kCapacity = 2'000'000;

  ProductIndexer(int states, int players);

  void decode(std::int64_t idx, int* xs) const;
  std::int64_t encode(const int* xs) const;
};

// Regrets of one player against a profile. Everyone, including the player
// under study, evaluates policies at the joint empirical state measure; the
// terminal condition is the terminal cost of the player's own state at that
// measure. `stepwise` transports one-step deviation gaps by the profile's
// state law with a per-step contraction weight, `end` compares whole-game
// scores, `actual` transports whole-tail gaps. Theory gives
// end <= stepwise <= actual <= (horizon) * stepwise, and all three are
// nonnegative; negative floating point noise beyond 1e-10 throws.
struct NpRegret {
  double stepwise = 0.0;
  double end = 0.0;
  double actual = 0.0;
  std::vector<double> per_step;
};

// player is 1-based. Players other than 1 are handled by moving their policy
// to the front of the profile, which leaves the empirical-measure terminal
// condition unchanged.
NpRegret np_regret(const GameSpec& game, const Evaluator& eval,
                   const PolicyProfile& profile, int player = 1);

// Average of stepwise regrets over all players; collapses to a single
// evaluation when the profile is homogeneous.
double np_average_regret(const GameSpec& game, const Evaluator& eval,
                         const PolicyProfile& profile);

// Terminal condition on the product space: entry for joint state x is the
// terminal cost of player 1's state at the empirical measure of x.
std::vector<double> np_terminal_values(const GameSpec& game, int n_players);

// Root (step 1) whole-game values over the product state space. `followed`
// scores player 1 following the profile; `optimal` scores the per-step
// minimizing deviation against the same co-players, so it is constant in the
// profile's player-1 entry.
struct NpRootValues {
  std::vector<double> optimal;
  std::vector<double> followed;
};

NpRootValues np_root_values(const GameSpec& game, const Evaluator& eval,
                            const PolicyProfile& profile);

// Law of the joint state at decision step t (1-based) under the profile,
// dense in ProductIndexer order. Step 1 is the iid initial product law.
std::vector<double> np_state_law(const GameSpec& game,
                                 const PolicyProfile& profile, int t);

}  // namespace mfg

#endif  // MFG_NPLAYER_HPP
