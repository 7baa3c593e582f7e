#include "mfg/lift.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfg/error.hpp"

namespace mfg {

MeanFieldFlow lift_flow(const GameSpec& game, const PolicyProfile& profile) {
  if (profile.size() < 1)
    throw ValidationError("lift: profile must contain at least one policy");
  for (int n = 0; n < profile.size(); ++n) validate_policy(game, profile[n]);

  const int nx = game.states.size();
  const int na = game.actions.size();
  const int horizon = game.horizon;

  bool homogeneous = true;
  for (int n = 1; n < profile.size() && homogeneous; ++n)
    homogeneous = profile[n] == profile[0];
  const int m = homogeneous ? 1 : profile.size();

  // chains[k] is the state law of (representative) player k at the current
  // step; xi is their average, the lifted population trajectory.
  std::vector<std::vector<double>> chains(
      static_cast<size_t>(m), game.initial.w);
  Dist xi = game.initial;

  MeanFieldFlow flow;
  flow.psi.reserve(static_cast<size_t>(horizon - 1));
  for (int t = 1; t <= horizon - 1; ++t) {
    std::vector<double> joint(static_cast<size_t>(nx) * na, 0.0);
    std::vector<std::vector<double>> next(
        static_cast<size_t>(m), std::vector<double>(nx, 0.0));
    for (int k = 0; k < m; ++k) {
      const PolicySpec& pol = profile[k];
      for (int x = 0; x < nx; ++x) {
        const double mass = chains[k][x];
        if (mass == 0.0) continue;
        Dist lambda = policy_dist(pol, t, x, xi);
        for (int a = 0; a < na; ++a) {
          const double w = mass * lambda[a];
          if (w == 0.0) continue;
          joint[static_cast<size_t>(x) * na + a] += w / m;
          Dist push = transition_dist(game, t, x, xi, a);
          for (int y = 0; y < nx; ++y) next[k][y] += w * push[y];
        }
      }
    }
    chains = std::move(next);
    std::vector<double> avg(nx, 0.0);
    for (int k = 0; k < m; ++k)
      for (int x = 0; x < nx; ++x) avg[x] += chains[k][x] / m;
    xi = make_dist(std::move(avg));
    flow.psi.push_back(make_joint(nx, na, std::move(joint)));
  }
  return flow;
}

Modulus profile_theta(const PolicyProfile& profile) {
  if (profile.size() < 1)
    throw ValidationError("profile_theta: profile must contain at least one policy");
  double K = 0.0, alpha = 1.0, cap = 0.0;
  bool any = false;
  for (int n = 0; n < profile.size(); ++n) {
    const Modulus& v = profile[n].vartheta;
    if (v.kind == ModulusKind::infinite) return infinite_modulus();
    if (v.kind == ModulusKind::zero) continue;
    K = std::max(K, v.K);
    alpha = std::min(alpha, v.alpha);
    cap = std::max(cap, v.cap);
    any = true;
  }
  if (!any) return zero_modulus();
  return alpha == 1.0 ? linear_modulus(K, cap) : power_modulus(K, alpha, cap);
}

namespace {

// Certified upper bound on the number of 1/j sup-balls covering the unit BL
// ball. The exact enumeration prunes by the metric's difference constraints;
// past 8 points or past an enumeration budget, the unpruned per-point grid
// count j^size still upper-bounds it.
double covering_count(const FiniteMetricSpace& space, int j) {
  const int m = space.size();
  const double full = std::pow(static_cast<double>(j), static_cast<double>(m));
  if (m <= 8 && full <= 2e6)
    return static_cast<double>(covering_number_upper(space, j));
  return full;
}

}  // namespace

RateDetail concentration_rate_detail(const FiniteMetricSpace& space,
                                     std::int64_t n, int j_max) {
  if (n < 1)
    throw ValidationError("concentration: sample count must be at least 1");
  if (j_max < 1)
    throw ValidationError("concentration: resolution ceiling must be at least 1");
  const double root = std::sqrt(2.0 * static_cast<double>(n));
  const double pi_root = std::sqrt(std::acos(-1.0));
  RateDetail best;
  for (int j = 1; j <= j_max; ++j) {
    // Any cover needs at least j balls (project onto one point), so once
    // this floor passes the incumbent no larger j can win.
    if (pi_root * j / root >= best.rate) break;
    const double rate = 0.5 / j + pi_root * covering_count(space, j) / root;
    if (rate < best.rate) {
      best.rate = rate;
      best.j = j;
    }
  }
  return best;
}

double concentration_rate(const FiniteMetricSpace& space, std::int64_t n,
                          int j_max) {
  return concentration_rate_detail(space, n, j_max).rate;
}

double growth_bound(const Evaluator& eval, int r, double z) {
  double acc = z;
  for (int k = 0; k < r; ++k) acc = eval.C0 + eval.C1 * acc;
  return acc;
}

namespace {

// Shared shape of the stepwise transfer budgets. dev is the per-step
// deviation sequence (size horizon), theta the policy modulus charged on the
// diagonal terms; the induced variant passes the zero modulus and its own
// deviation sequence.
double stepwise_transfer(const GameSpec& game, const Evaluator& eval,
                         const std::vector<double>& dev, const Modulus& theta) {
  const int horizon = game.horizon;
  const double vsup = terminal_sup(game);
  const double c = eval.Cbar;
  const Modulus& iota = game.moduli.iota;

  double head = 0.0;
  for (int t = 1; t <= horizon - 1; ++t) {
    double inner = 0.0;
    for (int r = t; r <= horizon - 1; ++r)
      inner += std::pow(c, r - t) * growth_bound(eval, horizon - r, vsup) *
               eval.zeta(dev[static_cast<size_t>(r) - 1]);
    inner += std::pow(c, horizon - t) * iota(dev[static_cast<size_t>(horizon) - 1]);
    head += (horizon + 1 - t) * inner;
  }

  double tail = 0.0;
  for (int t = 1; t <= horizon - 1; ++t) {
    const double d = dev[static_cast<size_t>(t) - 1];
    tail += growth_bound(eval, horizon - t, vsup) *
            (eval.zeta(theta(d)) + eval.zeta(d) + d);
  }

  return (1.0 + c) * head + c * iota(dev[static_cast<size_t>(horizon) - 1]) + tail;
}

}  // namespace

ErrorBudget error_budget(const GameSpec& game, const Evaluator& eval,
                         std::int64_t n_players, const Modulus& theta) {
  if (n_players < 1)
    throw ValidationError("budget: player count must be at least 1");
  const int horizon = game.horizon;
  const Modulus& eta = game.moduli.eta;
  const double n = static_cast<double>(n_players);

  ErrorBudget b;
  b.n_players = n_players;
  b.r_state = concentration_rate(game.states, n_players);
  b.r_joint =
      concentration_rate(product_space(game.states, game.actions), n_players);

  b.e.assign(static_cast<size_t>(horizon), 1.0);
  b.e[0] = b.r_state;
  for (int t = 2; t <= horizon; ++t) {
    double slope = 0.0, base = 0.0;
    for (int r = 1; r <= t - 1; ++r) {
      slope += theta(b.e[static_cast<size_t>(r) - 1]);
      base += eta(b.e[static_cast<size_t>(r) - 1]);
    }
    const double smoothed = inf_over_L(
        slope, [&](double u) { return base + eta(u); },
        [&](double u) { return eta(u); });
    b.e[static_cast<size_t>(t) - 1] =
        std::min(1.0, 2.0 * smoothed + t / n + b.r_state);
  }

  b.e_induced.assign(static_cast<size_t>(horizon), 1.0);
  b.e_induced[0] = b.r_state;
  for (int t = 2; t <= horizon; ++t) {
    double base = 0.0;
    for (int r = 1; r <= t - 1; ++r)
      base += eta(b.e_induced[static_cast<size_t>(r) - 1]);
    b.e_induced[static_cast<size_t>(t) - 1] =
        std::min(1.0, 2.0 * base + t / n + b.r_state);
  }

  b.flow_gap.assign(static_cast<size_t>(horizon) - 1, kInf);
  const double rate_gap = std::max(0.0, b.r_joint - b.r_state);
  for (int t = 1; t <= horizon - 1; ++t) {
    const double d = b.e[static_cast<size_t>(t) - 1];
    b.flow_gap[static_cast<size_t>(t) - 1] = 2.0 * theta(d) + 1.5 * d + rate_gap;
  }

  b.regret_transfer = stepwise_transfer(game, eval, b.e, theta);
  b.induced_transfer = stepwise_transfer(game, eval, b.e_induced, zero_modulus());

  double end = 0.0;
  const double vsup = terminal_sup(game);
  for (int r = 1; r <= horizon - 1; ++r)
    end += std::pow(eval.Cbar, r) * growth_bound(eval, horizon - r, vsup) *
           eval.zeta(b.e_induced[static_cast<size_t>(r) - 1]);
  end += std::pow(eval.Cbar, horizon - 1) *
         game.moduli.iota(b.e_induced[static_cast<size_t>(horizon) - 1]);
  b.induced_end_transfer = (horizon + 1) * end;

  return b;
}

}  // namespace mfg
