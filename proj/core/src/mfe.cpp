#include "mfg/mfe.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mfg/error.hpp"
#include "mfg/regret.hpp"
#include "mfg/rng.hpp"

namespace mfg {

namespace {

// Forward-rolls an action-row table (one Dist per step and state): the
// projection that turns any per-step rows into a consistent flow.
MeanFieldFlow roll_rows(const GameSpec& game,
                        std::vector<std::vector<Dist>> rows) {
  PolicySpec pol;
  pol.kind = PolicySpec::Kind::oblivious_table;
  pol.name = "rows";
  pol.table = std::move(rows);
  pol.vartheta = zero_modulus();
  return roll_flow(game, pol);
}

}  // namespace

MeanFieldFlow best_response_flow(const GameSpec& game, const Evaluator& eval,
                                 const MeanFieldFlow& flow) {
  validate_flow(game, flow);
  const double resid = check_mff(game, flow);
  if (resid > 1e-8)
    throw ConsistencyError("best response: input flow residual " +
                           std::to_string(resid));

  const int nx = game.states.size();
  const int na = game.actions.size();
  const int horizon = game.horizon;
  const std::vector<Dist> xis = flow_xis(game, flow);
  const MfBackward opt = mf_bellman(game, eval, xis);

  std::vector<std::vector<Dist>> rows(
      static_cast<size_t>(horizon) - 1, std::vector<Dist>(nx));
  for (int t = 1; t <= horizon - 1; ++t)
    for (int x = 0; x < nx; ++x)
      rows[static_cast<size_t>(t) - 1][static_cast<size_t>(x)] =
          dirac(na, opt.argmin[static_cast<size_t>(t) - 1][static_cast<size_t>(x)]);
  MeanFieldFlow out = roll_rows(game, std::move(rows));

  // The greedy support must score at the backward optimum against the frozen
  // marginals; integrate the per-atom excess and reject any real residual.
  double worst = 0.0;
  for (int t = 1; t <= horizon - 1; ++t) {
    const JointDist& psi = out.psi[static_cast<size_t>(t) - 1];
    double acc = 0.0;
    for (int x = 0; x < nx; ++x)
      for (int a = 0; a < na; ++a) {
        const double w = psi.at(x, a);
        if (w == 0.0) continue;
        acc += w * (mf_score(game, eval, t, x, xis[static_cast<size_t>(t) - 1],
                             dirac(na, a), opt.values[static_cast<size_t>(t)]) -
                    opt.values[static_cast<size_t>(t) - 1][static_cast<size_t>(x)]);
      }
    worst = std::max(worst, std::fabs(acc));
  }
  if (worst > 1e-10)
    throw ConsistencyError("best response: support optimality residual " +
                           std::to_string(worst));
  return out;
}

namespace {

std::vector<std::vector<Dist>> random_rows(const GameSpec& game,
                                           const CounterRng& rng,
                                           std::uint64_t restart) {
  const int nx = game.states.size();
  const int na = game.actions.size();
  const int horizon = game.horizon;
  std::vector<std::vector<Dist>> rows(
      static_cast<size_t>(horizon) - 1, std::vector<Dist>(nx));
  for (int t = 1; t <= horizon - 1; ++t)
    for (int x = 0; x < nx; ++x) {
      // Normalized exponentials: an interior point of the action simplex.
      std::vector<double> w(static_cast<size_t>(na));
      double total = 0.0;
      for (int a = 0; a < na; ++a) {
        const double u = rng.uniform(restart, static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(x),
                                     CounterRng::kGeneric,
                                     static_cast<std::uint64_t>(a));
        w[static_cast<size_t>(a)] = -std::log1p(-u);
        total += w[static_cast<size_t>(a)];
      }
      if (total <= 0.0) {
        rows[static_cast<size_t>(t) - 1][static_cast<size_t>(x)] = uniform_dist(na);
        continue;
      }
      for (double& v : w) v /= total;
      rows[static_cast<size_t>(t) - 1][static_cast<size_t>(x)] =
          make_dist(std::move(w));
    }
  return rows;
}

MeanFieldFlow mix_flows(const MeanFieldFlow& a, const MeanFieldFlow& b,
                        double weight_b) {
  MeanFieldFlow out;
  out.psi.reserve(a.psi.size());
  for (size_t t = 0; t < a.psi.size(); ++t) {
    std::vector<double> w(a.psi[t].w.size());
    for (size_t i = 0; i < w.size(); ++i)
      w[i] = (1.0 - weight_b) * a.psi[t].w[i] + weight_b * b.psi[t].w[i];
    out.psi.push_back(make_joint(a.psi[t].nx, a.psi[t].na, std::move(w)));
  }
  return out;
}

struct RestartOutcome {
  MeanFieldFlow flow;
  double mfr = kInf;
  int iterations = 0;
  bool converged = false;
};

RestartOutcome run_restart(const GameSpec& game, const Evaluator& eval,
                           const SolveOptions& opts, std::uint64_t restart) {
  const CounterRng rng(opts.seed);
  MeanFieldFlow cur = roll_rows(game, random_rows(game, rng, restart));

  RestartOutcome best;
  auto consider = [&](const MeanFieldFlow& flow, double mfr) {
    if (mfr < best.mfr) {
      best.mfr = mfr;
      best.flow = flow;
    }
  };

  for (int k = 0;; ++k) {
    const double cur_mfr = mf_regret(game, eval, cur).stepwise;
    consider(cur, cur_mfr);
    if (cur_mfr <= opts.tol) {
      best.iterations = k;
      best.converged = true;
      best.flow = cur;
      best.mfr = cur_mfr;
      break;
    }
    if (k >= opts.max_iter) {
      best.iterations = k;
      break;
    }
    const MeanFieldFlow br = best_response_flow(game, eval, cur);
    const double br_mfr = mf_regret(game, eval, br).stepwise;
    consider(br, br_mfr);
    if (br_mfr <= opts.tol) {
      best.iterations = k + 1;
      best.converged = true;
      best.flow = br;
      best.mfr = br_mfr;
      break;
    }
    cur = roll_rows(game, induced_rows(mix_flows(cur, br, opts.damping)));
    const double resid = check_mff(game, cur);
    if (resid > 1e-10)
      throw ConsistencyError("solver: rebuilt iterate residual " +
                             std::to_string(resid));
  }
  return best;
}

}  // namespace

SolveReport solve_mfe(const GameSpec& game, const Evaluator& eval,
                      const SolveOptions& opts) {
  if (!(opts.tol > 0.0))
    throw ValidationError("solver: tol must be positive");
  if (opts.max_iter < 0)
    throw ValidationError("solver: max_iter must be nonnegative");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    throw ValidationError("solver: damping must lie in (0, 1]");
  if (opts.restarts < 1)
    throw ValidationError("solver: restarts must be at least 1");

  // Merge by (regret, restart index): strict improvement keeps the earliest.
  RestartOutcome winner;
  for (int r = 0; r < opts.restarts; ++r) {
    RestartOutcome out =
        run_restart(game, eval, opts, static_cast<std::uint64_t>(r));
    if (out.mfr < winner.mfr) winner = std::move(out);
  }

  SolveReport report;
  report.flow = std::move(winner.flow);
  // Certification never reuses loop numbers: re-evaluate on the final flow.
  report.mfr = mf_regret(game, eval, report.flow, 1e-12).stepwise;
  report.iterations = winner.iterations;
  report.damping = opts.damping;
  report.restarts_used = opts.restarts;
  report.converged = report.mfr <= opts.tol;
  return report;
}

}  // namespace mfg
