#include "mfg/meanfield.hpp"

#include <algorithm>
#include <string>

#include "mfg/error.hpp"

namespace mfg {

void validate_flow(const GameSpec& game, const MeanFieldFlow& flow) {
  int T = game.horizon;
  int nx = static_cast<int>(game.states.size());
  int na = static_cast<int>(game.actions.size());
  if (flow.steps() != T - 1)
    throw ValidationError("flow: expected " + std::to_string(T - 1) +
                          " joint distributions, got " +
                          std::to_string(flow.steps()));
  for (const JointDist& j : flow.psi) {
    if (j.nx != nx || j.na != na)
      throw ValidationError("flow: joint distribution shape does not match the game");
    make_joint(j.nx, j.na, j.w);
  }
}

Dist q_push(const GameSpec& game, int t, const JointDist& psi) {
  Dist xi = joint_state_marginal(psi);
  std::vector<double> out(psi.nx, 0.0);
  for (int x = 0; x < psi.nx; ++x) {
    for (int a = 0; a < psi.na; ++a) {
      double w = psi.at(x, a);
      if (w == 0.0) continue;
      Dist next = transition_dist(game, t, x, xi, a);
      for (int y = 0; y < psi.nx; ++y) out[y] += w * next[y];
    }
  }
  return make_dist(std::move(out));
}

Dist q_push(const GameSpec& game, int t, int x, const Dist& xi,
            const Dist& lambda) {
  std::vector<double> out(game.states.size(), 0.0);
  for (int a = 0; a < lambda.size(); ++a) {
    double w = lambda[a];
    if (w == 0.0) continue;
    Dist next = transition_dist(game, t, x, xi, a);
    for (int y = 0; y < next.size(); ++y) out[static_cast<std::size_t>(y)] += w * next[y];
  }
  return make_dist(std::move(out));
}

std::vector<Dist> marginal_flow(const GameSpec& game, const PolicySpec& policy) {
  return flow_xis(game, roll_flow(game, policy));
}

std::vector<Dist> flow_xis(const GameSpec& game, const MeanFieldFlow& flow) {
  std::vector<Dist> xis;
  xis.reserve(flow.steps() + 1);
  for (const JointDist& j : flow.psi) xis.push_back(joint_state_marginal(j));
  xis.push_back(q_push(game, flow.steps(), flow.psi.back()));
  return xis;
}

Dist flow_terminal_xi(const GameSpec& game, const MeanFieldFlow& flow) {
  return q_push(game, flow.steps(), flow.psi.back());
}

std::vector<double> mff_residuals(const GameSpec& game,
                                  const MeanFieldFlow& flow) {
  std::vector<double> res(flow.steps());
  res[0] = tv_distance(joint_state_marginal(flow.psi[0]), game.initial);
  for (int t = 2; t <= flow.steps(); ++t)
    res[t - 1] = tv_distance(joint_state_marginal(flow.psi[t - 1]),
                             q_push(game, t - 1, flow.psi[t - 2]));
  return res;
}

double check_mff(const GameSpec& game, const MeanFieldFlow& flow) {
  validate_flow(game, flow);
  std::vector<double> res = mff_residuals(game, flow);
  return *std::max_element(res.begin(), res.end());
}

MeanFieldFlow roll_flow(const GameSpec& game, const PolicySpec& policy) {
  int T = game.horizon;
  int nx = static_cast<int>(game.states.size());
  MeanFieldFlow flow;
  flow.psi.reserve(T - 1);
  Dist xi = game.initial;
  for (int t = 1; t <= T - 1; ++t) {
    std::vector<Dist> rows;
    rows.reserve(nx);
    for (int x = 0; x < nx; ++x) rows.push_back(policy_dist(policy, t, x, xi));
    flow.psi.push_back(compose_joint(xi, rows));
    xi = q_push(game, t, flow.psi.back());
  }
  return flow;
}

std::vector<std::vector<Dist>> induced_rows(const MeanFieldFlow& flow) {
  std::vector<std::vector<Dist>> rows(flow.steps());
  for (int t = 0; t < flow.steps(); ++t) {
    const JointDist& j = flow.psi[t];
    rows[t].reserve(j.nx);
    for (int x = 0; x < j.nx; ++x) {
      double mass = 0.0;
      for (int a = 0; a < j.na; ++a) mass += j.at(x, a);
      if (mass <= 0.0) {
        rows[t].push_back(uniform_dist(j.na));
      } else {
        std::vector<double> r(j.na);
        for (int a = 0; a < j.na; ++a) r[a] = j.at(x, a) / mass;
        rows[t].push_back(make_dist(std::move(r)));
      }
    }
  }
  return rows;
}

MfBackward mf_bellman(const GameSpec& game, const Evaluator& eval,
                      const std::vector<Dist>& xis) {
  int T = game.horizon;
  int nx = static_cast<int>(game.states.size());
  int na = static_cast<int>(game.actions.size());
  if (static_cast<int>(xis.size()) != T)
    throw ValidationError("bellman: population trajectory must have horizon entries");

  MfBackward out;
  out.values.assign(T, {});
  out.argmin.assign(T - 1, std::vector<int>(nx, 0));
  out.values[T - 1] = terminal_vector(game, xis[T - 1]);
  for (int t = T - 1; t >= 1; --t) {
    std::vector<double> v(nx);
    for (int x = 0; x < nx; ++x) {
      double best = kInf;
      int best_a = 0;
      for (int a = 0; a < na; ++a) {
        double s = mf_score(game, eval, t, x, xis[t - 1], dirac(na, a),
                            out.values[t]);
        if (s < best) {
          best = s;
          best_a = a;
        }
      }
      v[x] = best;
      out.argmin[t - 1][x] = best_a;
    }
    out.values[t - 1] = std::move(v);
  }
  return out;
}

std::vector<std::vector<double>> mf_policy_values(const GameSpec& game,
                                                  const Evaluator& eval,
                                                  const std::vector<Dist>& xis,
                                                  const PolicySpec& policy) {
  int T = game.horizon;
  int nx = static_cast<int>(game.states.size());
  if (static_cast<int>(xis.size()) != T)
    throw ValidationError("policy values: population trajectory must have horizon entries");

  std::vector<std::vector<double>> values(T);
  values[T - 1] = terminal_vector(game, xis[T - 1]);
  for (int t = T - 1; t >= 1; --t) {
    std::vector<double> v(nx);
    for (int x = 0; x < nx; ++x)
      v[x] = mf_score(game, eval, t, x, xis[t - 1],
                      policy_dist(policy, t, x, xis[t - 1]), values[t]);
    values[t - 1] = std::move(v);
  }
  return values;
}

}  // namespace mfg
