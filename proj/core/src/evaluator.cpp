#include "mfg/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfg/error.hpp"

namespace mfg {

Evaluator Evaluator::from_game(const GameSpec& game) {
  Evaluator e;
  e.kind = game.evaluator.kind;
  e.kappa = game.evaluator.kappa;
  double cbar_family =
      e.kind == EvaluatorSpec::Kind::avar ? 1.0 / e.kappa : 1.0;
  e.Cbar = std::max(game.moduli.Cbar, cbar_family);
  e.C0 = std::max(1.0, game.moduli.C0);
  e.C1 = std::max({game.moduli.C1, 2.0 * e.Cbar, 1.0});
  e.zeta_decl = game.moduli.zeta;
  e.eta = game.moduli.eta;
  return e;
}

double Evaluator::zeta(double ell) const {
  if (ell <= 0.0) return 0.0;
  double hat = zeta_hat(ell);
  if (std::isinf(hat)) return kInf;
  auto pen = [this](double u) { return zeta_hat(u); };
  double smoothed = 2.0 * inf_over_L(ell, pen, pen);
  return std::max(hat, smoothed);
}

double avar_sorted(double kappa, std::span<const double> values_sorted,
                   std::span<const double> probs) {
  // F(q) = q + (1/kappa) sum p (v - q)+ decreases while P(v > q) >= kappa
  // and increases afterwards; scanning breakpoints from the top keeps the
  // suffix sums incremental.
  size_t n = values_sorted.size();
  double s0 = 0.0, s1 = 0.0;
  double best = kInf;
  for (size_t k = n; k-- > 0;) {
    double q = values_sorted[k];
    double f = q + (s1 - q * s0) / kappa;
    best = std::min(best, f);
    s0 += probs[k];
    s1 += probs[k] * q;
  }
  return best;
}

double avar_value(double kappa, const std::vector<double>& values,
                  const std::vector<double>& probs) {
  if (values.size() != probs.size())
    throw ConsistencyError("avar: value and probability sizes differ");
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> vs(values.size()), ps(values.size());
  for (size_t i = 0; i < order.size(); ++i) {
    vs[i] = values[order[i]];
    ps[i] = probs[order[i]];
  }
  return avar_sorted(kappa, vs, ps);
}

double mf_score(const GameSpec& game, const Evaluator& eval, int t, int x,
                const Dist& xi, const Dist& lambda,
                const std::vector<double>& v) {
  int na = static_cast<int>(game.actions.size());
  double total = 0.0;
  for (int a = 0; a < na; ++a) {
    double w = lambda[a];
    if (w == 0.0) continue;
    double cont;
    Dist next = transition_dist(game, t, x, xi, a);
    if (eval.kind == EvaluatorSpec::Kind::avar) {
      cont = avar_value(eval.kappa, v, next.w);
    } else {
      cont = std::inner_product(next.w.begin(), next.w.end(), v.begin(), 0.0);
    }
    total += w * (cost_value(game, t, x, xi, a) + cont);
  }
  return total;
}

}  // namespace mfg
