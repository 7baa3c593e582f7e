#include "mfg/regret.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mfg/error.hpp"

namespace mfg {

namespace {

double clamp_regret(double v, const char* what) {
  if (v < -1e-10)
    throw ConsistencyError(std::string(what) +
                           " came out negative beyond tolerance: " +
                           std::to_string(v));
  return std::max(v, 0.0);
}

void require_consistent(const GameSpec& game, const MeanFieldFlow& flow,
                        double tol) {
  double res = check_mff(game, flow);
  if (res > tol)
    throw ConsistencyError("flow violates consistency by " +
                           std::to_string(res));
}

double initial_score(const GameSpec& game, const Evaluator& eval,
                     const std::vector<double>& v) {
  if (eval.kind == EvaluatorSpec::Kind::avar)
    return avar_value(eval.kappa, v, game.initial.w);
  return std::inner_product(v.begin(), v.end(), game.initial.w.begin(), 0.0);
}

}  // namespace

MfRegret mf_regret(const GameSpec& game, const Evaluator& eval,
                   const MeanFieldFlow& flow, double consistency_tol) {
  require_consistent(game, flow, consistency_tol);
  int T = game.horizon;
  int nx = static_cast<int>(game.states.size());
  std::vector<Dist> xis = flow_xis(game, flow);
  MfBackward opt = mf_bellman(game, eval, xis);
  std::vector<std::vector<Dist>> rows = induced_rows(flow);

  MfRegret out;
  out.per_step.assign(T - 1, 0.0);
  for (int t = 1; t <= T - 1; ++t) {
    const Dist& xi = xis[t - 1];
    double gap = 0.0;
    for (int x = 0; x < nx; ++x) {
      if (xi[x] == 0.0) continue;
      double one_step =
          mf_score(game, eval, t, x, xi, rows[t - 1][x], opt.values[t]);
      gap += xi[x] * (one_step - opt.values[t - 1][x]);
    }
    out.per_step[t - 1] =
        std::pow(eval.Cbar, t) * clamp_regret(gap, "mean field regret term");
  }
  out.stepwise =
      std::accumulate(out.per_step.begin(), out.per_step.end(), 0.0);

  // Whole-game score of the induced kernel for the end regret.
  std::vector<double> v = opt.values[T - 1];
  for (int t = T - 1; t >= 1; --t) {
    std::vector<double> nv(nx);
    for (int x = 0; x < nx; ++x)
      nv[x] = mf_score(game, eval, t, x, xis[t - 1], rows[t - 1][x], v);
    v = std::move(nv);
  }
  out.end = clamp_regret(
      initial_score(game, eval, v) - initial_score(game, eval, opt.values[0]),
      "mean field end regret");
  return out;
}

double mf_regret_direct(const GameSpec& game, const Evaluator& eval,
                        const MeanFieldFlow& flow, double consistency_tol) {
  require_consistent(game, flow, consistency_tol);
  int T = game.horizon;
  int nx = static_cast<int>(game.states.size());
  int na = static_cast<int>(game.actions.size());
  std::vector<Dist> xis = flow_xis(game, flow);
  MfBackward opt = mf_bellman(game, eval, xis);

  double total = 0.0;
  for (int t = 1; t <= T - 1; ++t) {
    const Dist& xi = xis[t - 1];
    const JointDist& psi = flow.psi[t - 1];
    const std::vector<double>& tail = opt.values[t];
    double score = 0.0;
    for (int x = 0; x < nx; ++x) {
      for (int a = 0; a < na; ++a) {
        double w = psi.at(x, a);
        if (w == 0.0) continue;
        Dist next = transition_dist(game, t, x, xi, a);
        double cont = eval.kind == EvaluatorSpec::Kind::avar
                          ? avar_value(eval.kappa, tail, next.w)
                          : std::inner_product(next.w.begin(), next.w.end(),
                                               tail.begin(), 0.0);
        score += w * (cost_value(game, t, x, xi, a) + cont);
      }
    }
    double base = 0.0;
    for (int x = 0; x < nx; ++x) base += xi[x] * opt.values[t - 1][x];
    total += std::pow(eval.Cbar, t) *
             clamp_regret(score - base, "mean field regret term");
  }
  return total;
}

}  // namespace mfg
