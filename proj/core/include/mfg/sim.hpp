#ifndef MFG_SIM_HPP
#define MFG_SIM_HPP

#include <cstdint>
#include <vector>

#include "mfg/game.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/spaces.hpp"

namespace mfg {

// Outcome of seeded Monte Carlo rollouts of the N-player dynamics: states
// start iid from the initial law, every player's action is drawn from its
// policy evaluated at the current empirical state measure, and transitions
// draw from the kernel at that same empirical measure.
struct SimResult {
  std::int64_t n_players = 0;
  int reps = 0;
  std::uint64_t seed = 0;

  // The lifted profile; all distances below are measured against it.
  MeanFieldFlow reference;

  // flows[r][t-1]: empirical state-action measure of replication r at step t.
  // Every atom is a multiple of 1/N by construction.
  std::vector<std::vector<JointDist>> flows;

  // bl[r][t-1]: BL distance (sum metric on state x action) to the reference
  // joint at step t; mean_bl/se_bl are the per-step sample mean and standard
  // error over replications.
  std::vector<std::vector<double>> bl;
  std::vector<double> mean_bl;
  std::vector<double> se_bl;
};

// Bit-reproducible for fixed (game, profile, n_players, reps, seed): every
// draw is keyed by (seed, replication, step, player, purpose), so scheduling
// cannot reorder streams. The profile must hold 1 or n_players policies; a
// single policy drives every player.
SimResult simulate(const GameSpec& game, const PolicyProfile& profile,
                   std::int64_t n_players, int reps, std::uint64_t seed);

// Monte Carlo check of the empirical-measure deviation rate: each
// replication draws one sample from every law in mus, then measures the BL
// distance between the empirical measure and the average law. The bound is
// the concentration rate for mus.size() samples, with the resolution that
// attains it (j = 0 when the clamp at 1 wins).
struct ConcentrationResult {
  double estimate = 0.0;
  double se = 0.0;
  double bound = 1.0;
  int j = 0;
};

ConcentrationResult concentration(const FiniteMetricSpace& space,
                                  const std::vector<Dist>& mus, int reps,
                                  std::uint64_t seed);

// Per-step comparison of the expected deviation between the empirical
// state-action measure and the lifted joint against its computable bound.
// Estimates come from simulate; bounds are the error budget's flow_gap
// entries and are +inf when a policy's declared modulus is infinite.
struct GapResult {
  std::vector<double> estimate;  // per step t = 1..horizon-1
  std::vector<double> se;
  std::vector<double> bound;
};

GapResult empirical_gap(const GameSpec& game, const PolicyProfile& profile,
                        std::int64_t n_players, int reps, std::uint64_t seed);

}  // namespace mfg

#endif  // MFG_SIM_HPP
