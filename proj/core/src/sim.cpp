#include "mfg/sim.hpp"

#include <cmath>
#include <optional>
#include <vector>

#include "mfg/error.hpp"
#include "mfg/evaluator.hpp"
#include "mfg/lift.hpp"
#include "mfg/rng.hpp"

namespace mfg {

namespace {

void mean_and_se(const std::vector<std::vector<double>>& rows, int steps,
                 std::vector<double>& mean, std::vector<double>& se) {
  const int reps = static_cast<int>(rows.size());
  mean.assign(static_cast<size_t>(steps), 0.0);
  se.assign(static_cast<size_t>(steps), 0.0);
  for (const auto& row : rows)
    for (int t = 0; t < steps; ++t) mean[static_cast<size_t>(t)] += row[static_cast<size_t>(t)];
  for (int t = 0; t < steps; ++t) mean[static_cast<size_t>(t)] /= reps;
  if (reps < 2) return;
  for (const auto& row : rows)
    for (int t = 0; t < steps; ++t) {
      const double d = row[static_cast<size_t>(t)] - mean[static_cast<size_t>(t)];
      se[static_cast<size_t>(t)] += d * d;
    }
  for (int t = 0; t < steps; ++t)
    se[static_cast<size_t>(t)] =
        std::sqrt(se[static_cast<size_t>(t)] / (reps - 1) / reps);
}

}  // namespace

SimResult simulate(const GameSpec& game, const PolicyProfile& profile,
                   std::int64_t n_players, int reps, std::uint64_t seed) {
  if (n_players < 1)
    throw ValidationError("simulate: player count must be at least 1");
  if (reps < 1)
    throw ValidationError("simulate: replication count must be at least 1");
  if (profile.size() != 1 && profile.size() != n_players)
    throw ValidationError("simulate: profile must hold 1 or N policies");
  for (int n = 0; n < profile.size(); ++n) validate_policy(game, profile[n]);
  const bool shared = profile.size() == 1;

  const int nx = game.states.size();
  const int na = game.actions.size();
  const int horizon = game.horizon;
  const int steps = horizon - 1;
  const CounterRng rng(seed);
  const FiniteMetricSpace joint_space = product_space(game.states, game.actions);

  SimResult res;
  res.n_players = n_players;
  res.reps = reps;
  res.seed = seed;
  res.reference = shared ? lift_flow(game, PolicyProfile(profile[0], 1))
                         : lift_flow(game, profile);
  res.flows.reserve(static_cast<size_t>(reps));
  res.bl.reserve(static_cast<size_t>(reps));

  const int n = static_cast<int>(n_players);
  std::vector<int> state(static_cast<size_t>(n));
  std::vector<int> action(static_cast<size_t>(n));

  for (int rep = 0; rep < reps; ++rep) {
    for (int p = 0; p < n; ++p)
      state[static_cast<size_t>(p)] =
          rng.sample(game.initial, static_cast<std::uint64_t>(rep), 0,
                     static_cast<std::uint64_t>(p), CounterRng::kInitState);

    std::vector<JointDist> flow;
    std::vector<double> dist_row;
    flow.reserve(static_cast<size_t>(steps));
    dist_row.reserve(static_cast<size_t>(steps));

    for (int t = 1; t <= steps; ++t) {
      std::vector<double> counts(static_cast<size_t>(nx), 0.0);
      for (int p = 0; p < n; ++p) counts[static_cast<size_t>(state[static_cast<size_t>(p)])] += 1.0;
      for (double& c : counts) c /= n;
      const Dist delta = make_dist(counts);

      // Policy and kernel rows at the shared empirical measure are reused
      // across players; a lone policy makes the action rows shared too.
      std::vector<std::optional<Dist>> action_rows(
          shared ? static_cast<size_t>(nx) : 0);
      std::vector<std::optional<Dist>> kernel_rows(
          static_cast<size_t>(nx) * na);

      std::vector<double> joint(static_cast<size_t>(nx) * na, 0.0);
      for (int p = 0; p < n; ++p) {
        const int x = state[static_cast<size_t>(p)];
        int a;
        if (shared) {
          auto& row = action_rows[static_cast<size_t>(x)];
          if (!row) row = policy_dist(profile[0], t, x, delta);
          a = rng.sample(*row, static_cast<std::uint64_t>(rep),
                         static_cast<std::uint64_t>(t),
                         static_cast<std::uint64_t>(p), CounterRng::kAction);
        } else {
          const Dist row = policy_dist(profile[p], t, x, delta);
          a = rng.sample(row, static_cast<std::uint64_t>(rep),
                         static_cast<std::uint64_t>(t),
                         static_cast<std::uint64_t>(p), CounterRng::kAction);
        }
        action[static_cast<size_t>(p)] = a;
        joint[static_cast<size_t>(x) * na + a] += 1.0 / n;
      }

      JointDist emp = make_joint(nx, na, joint);
      dist_row.push_back(bl_distance(
          joint_space, Dist{emp.w},
          Dist{res.reference.psi[static_cast<size_t>(t) - 1].w}));
      flow.push_back(std::move(emp));

      if (t == steps) break;  // the final transition feeds nothing reported
      for (int p = 0; p < n; ++p) {
        const int x = state[static_cast<size_t>(p)];
        const int a = action[static_cast<size_t>(p)];
        auto& row = kernel_rows[static_cast<size_t>(x) * na + a];
        if (!row) row = transition_dist(game, t, x, delta, a);
        state[static_cast<size_t>(p)] =
            rng.sample(*row, static_cast<std::uint64_t>(rep),
                       static_cast<std::uint64_t>(t),
                       static_cast<std::uint64_t>(p), CounterRng::kNextState);
      }
    }
    res.flows.push_back(std::move(flow));
    res.bl.push_back(std::move(dist_row));
  }

  mean_and_se(res.bl, steps, res.mean_bl, res.se_bl);
  return res;
}

ConcentrationResult concentration(const FiniteMetricSpace& space,
                                  const std::vector<Dist>& mus, int reps,
                                  std::uint64_t seed) {
  if (mus.empty())
    throw ValidationError("concentration: need at least one law");
  if (reps < 100)
    throw ValidationError("concentration: need at least 100 replications");
  const int m = space.size();
  for (const Dist& mu : mus)
    if (mu.size() != m)
      throw ValidationError("concentration: law size does not match the space");

  const int n = static_cast<int>(mus.size());
  std::vector<double> avg(static_cast<size_t>(m), 0.0);
  for (const Dist& mu : mus)
    for (int i = 0; i < m; ++i) avg[static_cast<size_t>(i)] += mu[i] / n;
  const Dist mu_bar = make_dist(std::move(avg));

  const CounterRng rng(seed);
  double mean = 0.0, sq = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> counts(static_cast<size_t>(m), 0.0);
    for (int p = 0; p < n; ++p) {
      const int y = rng.sample(mus[static_cast<size_t>(p)],
                               static_cast<std::uint64_t>(rep), 0,
                               static_cast<std::uint64_t>(p), CounterRng::kGeneric);
      counts[static_cast<size_t>(y)] += 1.0 / n;
    }
    const double d = bl_distance(space, make_dist(std::move(counts)), mu_bar);
    mean += d;
    sq += d * d;
  }
  mean /= reps;

  ConcentrationResult out;
  out.estimate = mean;
  if (reps > 1) {
    const double var = std::max(0.0, (sq - reps * mean * mean) / (reps - 1));
    out.se = std::sqrt(var / reps);
  }
  const RateDetail rd = concentration_rate_detail(space, n);
  out.bound = rd.rate;
  out.j = rd.j;
  return out;
}

GapResult empirical_gap(const GameSpec& game, const PolicyProfile& profile,
                        std::int64_t n_players, int reps, std::uint64_t seed) {
  const SimResult sim = simulate(game, profile, n_players, reps, seed);
  const ErrorBudget budget = error_budget(
      game, Evaluator::from_game(game), n_players, profile_theta(profile));
  GapResult out;
  out.estimate = sim.mean_bl;
  out.se = sim.se_bl;
  out.bound = budget.flow_gap;
  return out;
}

}  // namespace mfg
