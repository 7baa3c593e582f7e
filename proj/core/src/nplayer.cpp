#include "mfg/nplayer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mfg/error.hpp"

namespace mfg {

ProductIndexer::ProductIndexer(int states_, int players_)
    : states(states_), players(players_) {
  if (states <= 0 || players <= 0)
    throw ValidationError("product indexer: empty state space or player set");
  total = 1;
  for (int n = 0; n < players; ++n) {
    total *= states;
    if (total > kCapacity)
      throw CapacityError("joint state space exceeds " +
                          std::to_string(kCapacity) + " entries");
  }
}

void ProductIndexer::decode(std::int64_t idx, int* xs) const {
  for (int n = players - 1; n >= 0; --n) {
    xs[n] = static_cast<int>(idx % states);
    idx /= states;
  }
}

std::int64_t ProductIndexer::encode(const int* xs) const {
  std::int64_t idx = 0;
  for (int n = 0; n < players; ++n) idx = idx * states + xs[n];
  return idx;
}

namespace {

double clamp_regret(double v, const char* what) {
  if (v < -1e-10)
    throw ConsistencyError(std::string(what) +
                           " came out negative beyond tolerance: " +
                           std::to_string(v));
  return std::max(v, 0.0);
}

class NpEngine {
 public:
  NpEngine(const GameSpec& g, const Evaluator& e, const PolicyProfile& prof)
      : game(g),
        eval(e),
        profile(prof),
        idx(static_cast<int>(g.states.size()),
            static_cast<int>(prof.size())),
        S(static_cast<int>(g.states.size())),
        A(static_cast<int>(g.actions.size())),
        N(static_cast<int>(prof.size())),
        T(g.horizon),
        total(idx.total) {}

  NpRegret run() {
    std::vector<std::vector<double>> rho = forward_laws();
    std::vector<double> u_star = terminal_values();
    std::vector<double> u_follow = u_star;

    NpRegret out;
    out.per_step.assign(T - 1, 0.0);
    std::vector<double> actual_terms(T - 1, 0.0);
    std::vector<double> o_star(total), o_mixed(total), o_follow(total);
    for (int t = T - 1; t >= 1; --t) {
      if (eval.kind == EvaluatorSpec::Kind::avar)
        avar_step(t, u_star, u_follow, o_star, o_mixed, o_follow);
      else
        expsum_step(t, u_star, u_follow, o_star, o_mixed, o_follow);

      const std::vector<double>& law = rho[t - 1];
      double step_gap = 0.0, actual_gap = 0.0;
      for (std::int64_t i = 0; i < total; ++i) {
        step_gap += law[i] * (o_mixed[i] - o_star[i]);
        actual_gap += law[i] * (o_follow[i] - o_star[i]);
      }
      double w = std::pow(eval.Cbar, t);
      out.per_step[t - 1] = w * clamp_regret(step_gap, "stepwise regret term");
      actual_terms[t - 1] = w * clamp_regret(actual_gap, "actual regret term");
      u_star.swap(o_star);
      u_follow.swap(o_follow);
    }

    out.stepwise = std::accumulate(out.per_step.begin(), out.per_step.end(), 0.0);
    out.actual = std::accumulate(actual_terms.begin(), actual_terms.end(), 0.0);
    out.end = clamp_regret(initial_score(u_follow, rho[0]) -
                               initial_score(u_star, rho[0]),
                           "end regret");
    return out;
  }

  NpRootValues roots() {
    std::vector<double> u_star = terminal_values();
    std::vector<double> u_follow = u_star;
    std::vector<double> o_star(total), o_mixed(total), o_follow(total);
    for (int t = T - 1; t >= 1; --t) {
      if (eval.kind == EvaluatorSpec::Kind::avar)
        avar_step(t, u_star, u_follow, o_star, o_mixed, o_follow);
      else
        expsum_step(t, u_star, u_follow, o_star, o_mixed, o_follow);
      u_star.swap(o_star);
      u_follow.swap(o_follow);
    }
    return {std::move(u_star), std::move(u_follow)};
  }

  std::vector<double> law_at(int t) { return forward_laws()[t - 1]; }

 private:
  const GameSpec& game;
  const Evaluator& eval;
  const PolicyProfile& profile;
  ProductIndexer idx;
  int S, A, N, T;
  std::int64_t total;

  Dist empirical(const int* xs) const {
    std::vector<double> w(S, 0.0);
    for (int n = 0; n < N; ++n) w[xs[n]] += 1.0;
    for (double& v : w) v /= N;
    return make_dist(std::move(w));
  }

  double terminal_at(int x, const Dist& xi) const {
    double v = game.terminal.base[x];
    if (!game.terminal.mix.empty())
      for (int y = 0; y < S; ++y) v += game.terminal.mix[x][y] * xi[y];
    return v;
  }

  std::vector<double> terminal_values() const {
    std::vector<double> u(total);
    std::vector<int> xs(N);
    for (std::int64_t i = 0; i < total; ++i) {
      idx.decode(i, xs.data());
      u[i] = terminal_at(xs[0], empirical(xs.data()));
    }
    return u;
  }

  // Everyone's mixed next-state rows at a source state.
  void mixed_rows(int t, const int* xs, const Dist& xi,
                  std::vector<std::vector<double>>& q) const {
    for (int n = 0; n < N; ++n) {
      Dist lam = policy_dist(profile[static_cast<size_t>(n)], t, xs[n], xi);
      std::vector<double>& row = q[n];
      std::fill(row.begin(), row.end(), 0.0);
      for (int a = 0; a < A; ++a) {
        double w = lam[a];
        if (w == 0.0) continue;
        Dist next = transition_dist(game, t, xs[n], xi, a);
        for (int y = 0; y < S; ++y) row[y] += w * next[y];
      }
    }
  }

  // Product laws of the joint state under the profile, one per decision step.
  std::vector<std::vector<double>> forward_laws() const {
    std::vector<std::vector<double>> rho(T - 1);
    rho[0].assign(total, 0.0);
    std::vector<int> xs(N);
    for (std::int64_t i = 0; i < total; ++i) {
      idx.decode(i, xs.data());
      double p = 1.0;
      for (int n = 0; n < N; ++n) p *= game.initial[xs[n]];
      rho[0][i] = p;
    }
    std::vector<std::vector<double>> q(N, std::vector<double>(S));
    std::vector<double> expand(total);
    for (int t = 1; t <= T - 2; ++t) {
      rho[t].assign(total, 0.0);
      for (std::int64_t i = 0; i < total; ++i) {
        double w = rho[t - 1][i];
        if (w == 0.0) continue;
        idx.decode(i, xs.data());
        mixed_rows(t, xs.data(), empirical(xs.data()), q);
        // expand the product measure level by level, then accumulate
        expand[0] = w;
        std::int64_t len = 1;
        for (int n = 0; n < N; ++n) {
          for (std::int64_t j = len; j-- > 0;) {
            double base = expand[j];
            for (int y = S - 1; y >= 0; --y) expand[j * S + y] = base * q[n][y];
          }
          len *= S;
        }
        for (std::int64_t j = 0; j < total; ++j) rho[t][j] += expand[j];
      }
    }
    return rho;
  }

  // Contracts coordinates of players 2..N of u with their mixed rows, leaving
  // a vector over player-1 next states. The last coordinate is contiguous, so
  // each pass shrinks the array by a factor of the state count.
  void contract_tail(const std::vector<double>& u,
                     const std::vector<std::vector<double>>& q,
                     std::vector<double>& bank0, std::vector<double>& bank1,
                     double* out) const {
    const double* src = u.data();
    std::int64_t len = total;
    double* banks[2] = {bank0.data(), bank1.data()};
    int cur = 0;
    for (int n = N - 1; n >= 1; --n) {
      const double* row = q[n].data();
      std::int64_t out_len = len / S;
      double* dst = banks[cur];
      for (std::int64_t i = 0; i < out_len; ++i) {
        const double* blk = src + i * S;
        double acc = 0.0;
        for (int y = 0; y < S; ++y) acc += blk[y] * row[y];
        dst[i] = acc;
      }
      src = dst;
      len = out_len;
      cur ^= 1;
    }
    for (int y = 0; y < S; ++y) out[y] = src[y];
  }

  void expsum_step(int t, const std::vector<double>& u_star,
                   const std::vector<double>& u_follow,
                   std::vector<double>& o_star, std::vector<double>& o_mixed,
                   std::vector<double>& o_follow) const {
    std::vector<int> xs(N);
    std::vector<std::vector<double>> q(N, std::vector<double>(S));
    std::int64_t bank_len = total / S;
    std::vector<double> bank0(std::max<std::int64_t>(bank_len, 1)),
        bank1(std::max<std::int64_t>(bank_len, 1));
    std::vector<double> w_star(S), w_follow(S);
    for (std::int64_t i = 0; i < total; ++i) {
      idx.decode(i, xs.data());
      Dist xi = empirical(xs.data());
      mixed_rows(t, xs.data(), xi, q);
      if (N > 1) {
        contract_tail(u_star, q, bank0, bank1, w_star.data());
        contract_tail(u_follow, q, bank0, bank1, w_follow.data());
      } else {
        for (int y = 0; y < S; ++y) {
          w_star[y] = u_star[y];
          w_follow[y] = u_follow[y];
        }
      }
      Dist lam1 = policy_dist(profile[0], t, xs[0], xi);
      double cost_avg = 0.0, mixed_acc = 0.0, follow_acc = 0.0;
      double star_best = kInf;
      for (int a = 0; a < A; ++a) {
        double c = cost_value(game, t, xs[0], xi, a);
        Dist next = transition_dist(game, t, xs[0], xi, a);
        double cont_star = 0.0, cont_follow = 0.0;
        for (int y = 0; y < S; ++y) {
          cont_star += next[y] * w_star[y];
          cont_follow += next[y] * w_follow[y];
        }
        star_best = std::min(star_best, c + cont_star);
        double w = lam1[a];
        if (w != 0.0) {
          cost_avg += w * c;
          mixed_acc += w * cont_star;
          follow_acc += w * cont_follow;
        }
      }
      o_star[i] = star_best;
      o_mixed[i] = cost_avg + mixed_acc;
      o_follow[i] = cost_avg + follow_acc;
    }
  }

  void avar_step(int t, const std::vector<double>& u_star,
                 const std::vector<double>& u_follow,
                 std::vector<double>& o_star, std::vector<double>& o_mixed,
                 std::vector<double>& o_follow) const {
    // Tail values presorted once per step; per source and joint action the
    // product law is expanded in natural order and gathered into each order.
    std::vector<std::int64_t> ord_star(total), ord_follow(total);
    std::iota(ord_star.begin(), ord_star.end(), std::int64_t{0});
    std::iota(ord_follow.begin(), ord_follow.end(), std::int64_t{0});
    std::sort(ord_star.begin(), ord_star.end(), [&](std::int64_t a, std::int64_t b) {
      return u_star[a] < u_star[b];
    });
    std::sort(ord_follow.begin(), ord_follow.end(),
              [&](std::int64_t a, std::int64_t b) { return u_follow[a] < u_follow[b]; });
    std::vector<double> vs_star(total), vs_follow(total);
    for (std::int64_t k = 0; k < total; ++k) {
      vs_star[k] = u_star[ord_star[k]];
      vs_follow[k] = u_follow[ord_follow[k]];
    }

    std::vector<int> xs(N), as(N);
    std::vector<double> probs(total);
    std::vector<double> vals_a1(A), costs(A);
    // transition rows per (player, action) at the current source
    std::vector<std::vector<double>> prow(static_cast<size_t>(N) * A);
    std::vector<Dist> lam(N);

    for (std::int64_t i = 0; i < total; ++i) {
      idx.decode(i, xs.data());
      Dist xi = empirical(xs.data());
      for (int n = 0; n < N; ++n) {
        lam[n] = policy_dist(profile[static_cast<size_t>(n)], t, xs[n], xi);
        for (int a = 0; a < A; ++a)
          prow[static_cast<size_t>(n) * A + a] =
              transition_dist(game, t, xs[n], xi, a).w;
      }
      double cost_avg = 0.0;
      for (int a = 0; a < A; ++a) {
        costs[a] = cost_value(game, t, xs[0], xi, a);
        cost_avg += lam[0][a] * costs[a];
      }
      std::fill(vals_a1.begin(), vals_a1.end(), 0.0);
      double mixed_acc = 0.0, follow_acc = 0.0;

      std::fill(as.begin(), as.end(), 0);
      while (true) {
        double wt_others = 1.0;
        for (int n = 1; n < N; ++n) wt_others *= lam[n][as[n]];
        if (wt_others != 0.0) {
          // product next-state law over all players, natural joint order
          probs[0] = 1.0;
          std::int64_t len = 1;
          for (int n = 0; n < N; ++n) {
            const double* row = prow[static_cast<size_t>(n) * A + as[n]].data();
            for (std::int64_t j = len; j-- > 0;) {
              double base = probs[j];
              for (int y = S - 1; y >= 0; --y) probs[j * S + y] = base * row[y];
            }
            len *= S;
          }
          double av_star = gathered_avar(vs_star, ord_star, probs);
          vals_a1[as[0]] += wt_others * av_star;
          double w1 = lam[0][as[0]];
          if (w1 != 0.0) {
            mixed_acc += w1 * wt_others * av_star;
            follow_acc +=
                w1 * wt_others * gathered_avar(vs_follow, ord_follow, probs);
          }
        }
        int n = N - 1;
        while (n >= 0 && ++as[n] == A) as[n--] = 0;
        if (n < 0) break;
      }

      double star_best = kInf;
      for (int a = 0; a < A; ++a)
        star_best = std::min(star_best, costs[a] + vals_a1[a]);
      o_star[i] = star_best;
      o_mixed[i] = cost_avg + mixed_acc;
      o_follow[i] = cost_avg + follow_acc;
    }
  }

  double gathered_avar(const std::vector<double>& sorted_vals,
                       const std::vector<std::int64_t>& order,
                       const std::vector<double>& probs) const {
    double s0 = 0.0, s1 = 0.0, best = kInf;
    for (std::int64_t k = total; k-- > 0;) {
      double q = sorted_vals[k];
      double f = q + (s1 - q * s0) / eval.kappa;
      best = std::min(best, f);
      double p = probs[order[k]];
      s0 += p;
      s1 += p * q;
    }
    return best;
  }

  double initial_score(const std::vector<double>& u,
                       const std::vector<double>& rho1) const {
    if (eval.kind == EvaluatorSpec::Kind::avar)
      return avar_value(eval.kappa, u, rho1);
    return std::inner_product(u.begin(), u.end(), rho1.begin(), 0.0);
  }
};

}  // namespace

NpRegret np_regret(const GameSpec& game, const Evaluator& eval,
                   const PolicyProfile& profile, int player) {
  int N = static_cast<int>(profile.size());
  if (player < 1 || player > N)
    throw ValidationError("regret: player index out of range");
  for (const PolicySpec& p : profile.policies) validate_policy(game, p);
  if (player == 1) return NpEngine(game, eval, profile).run();
  PolicyProfile moved;
  moved.policies.reserve(profile.size());
  moved.policies.push_back(profile[static_cast<size_t>(player - 1)]);
  for (int n = 0; n < N; ++n)
    if (n != player - 1) moved.policies.push_back(profile[static_cast<size_t>(n)]);
  return NpEngine(game, eval, moved).run();
}

double np_average_regret(const GameSpec& game, const Evaluator& eval,
                         const PolicyProfile& profile) {
  int N = static_cast<int>(profile.size());
  bool homogeneous = true;
  for (int n = 1; n < N && homogeneous; ++n)
    homogeneous = profile[static_cast<size_t>(n)] == profile[0];
  if (homogeneous) return np_regret(game, eval, profile, 1).stepwise;
  double sum = 0.0;
  for (int n = 1; n <= N; ++n)
    sum += np_regret(game, eval, profile, n).stepwise;
  return sum / N;
}

std::vector<double> np_terminal_values(const GameSpec& game, int n_players) {
  ProductIndexer idx(static_cast<int>(game.states.size()), n_players);
  const int S = idx.states, N = idx.players;
  std::vector<double> u(static_cast<std::size_t>(idx.total));
  std::vector<int> xs(static_cast<std::size_t>(N));
  std::vector<double> w(static_cast<std::size_t>(S));
  for (std::int64_t i = 0; i < idx.total; ++i) {
    idx.decode(i, xs.data());
    std::fill(w.begin(), w.end(), 0.0);
    for (int n = 0; n < N; ++n) w[static_cast<std::size_t>(xs[n])] += 1.0 / N;
    u[static_cast<std::size_t>(i)] =
        terminal_vector(game, make_dist(w))[static_cast<std::size_t>(xs[0])];
  }
  return u;
}

NpRootValues np_root_values(const GameSpec& game, const Evaluator& eval,
                            const PolicyProfile& profile) {
  for (const PolicySpec& p : profile.policies) validate_policy(game, p);
  return NpEngine(game, eval, profile).roots();
}

std::vector<double> np_state_law(const GameSpec& game,
                                 const PolicyProfile& profile, int t) {
  if (t < 1 || t > game.horizon - 1)
    throw ValidationError("state law: step out of range");
  for (const PolicySpec& p : profile.policies) validate_policy(game, p);
  Evaluator eval = Evaluator::from_game(game);
  return NpEngine(game, eval, profile).law_at(t);
}

}  // namespace mfg
