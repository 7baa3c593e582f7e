// Acceptance battery: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion checks a frozen behaviour of the library
// end to end against independent oracles and carries its own time budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mfg/error.hpp"
#include "mfg/evaluator.hpp"
#include "mfg/game.hpp"
#include "mfg/lift.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/mfe.hpp"
#include "mfg/nplayer.hpp"
#include "mfg/regret.hpp"
#include "mfg/sim.hpp"
#include "mfg/spaces.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace mfg;

namespace {

struct Checker {
  std::vector<std::string> fails;

  void require(bool ok, const std::string& what) {
    if (!ok) fails.push_back(what);
  }
  void close(double got, double want, double tol, const std::string& what) {
    require(std::abs(got - want) <= tol,
            what + " (got " + std::to_string(got) + ", want " +
                std::to_string(want) + ")");
  }
};

// 1. In the counterexample game every player of the exact N-player game is
// regret-free, yet the lifted flow has stepwise regret 1 and the mean field
// best response leaves the ground state immediately.
void crit_counterexample(Checker& c) {
  const GameSpec g = builtin_game("no_one_get_it");
  const Evaluator e = Evaluator::from_game(g);
  for (int n : {2, 4, 8}) {
    const PolicyProfile prof(*g.policy, n);
    for (int player = 1; player <= n; ++player) {
      const NpRegret reg = np_regret(g, e, prof, player);
      c.require(std::abs(reg.stepwise) <= 1e-12,
                "player " + std::to_string(player) + " of " + std::to_string(n) +
                    " has stepwise regret " + std::to_string(reg.stepwise));
    }
    const MfRegret mfr = mf_regret(g, e, lift_flow(g, prof));
    c.close(mfr.stepwise, 1.0, 1e-9,
            "lifted stepwise regret at n=" + std::to_string(n));
  }
  const MeanFieldFlow flow = lift_flow(g, PolicyProfile(*g.policy, 4));
  const MfBackward opt = mf_bellman(g, e, flow_xis(g, flow));
  c.require(opt.argmin[0][0] == 1,
            "mean field best response should leave ground at the first step");
}

// 2. Expected-sum evaluation makes end and stepwise regret coincide, and the
// three regret notions sandwich each other, across a random corpus.
void crit_expected_sum_identity(Checker& c) {
  testutil::TRand r(4001);
  for (int i = 0; i < 50; ++i) {
    const int nx = 1 + r.ui(3), na = 1 + r.ui(3), T = 2 + r.ui(3);
    const int n = 1 + r.ui(3);
    const bool coupled = r.u() < 0.5;
    const GameSpec g =
        testutil::random_game(5000 + static_cast<std::uint64_t>(i) * 7, nx, na,
                              T, coupled, false);
    const PolicySpec pol =
        testutil::random_policy(6000 + static_cast<std::uint64_t>(i) * 7, g);
    const NpRegret reg = np_regret(g, Evaluator::from_game(g), PolicyProfile(pol, n));
    const std::string tag = " (game " + std::to_string(i) + ")";
    c.require(std::abs(reg.end - reg.stepwise) <= 1e-9, "end != stepwise" + tag);
    c.require(reg.end <= reg.stepwise + 1e-9, "end > stepwise" + tag);
    c.require(reg.stepwise <= reg.actual + 1e-9, "stepwise > actual" + tag);
    c.require(reg.actual <= T * reg.stepwise + 1e-9,
              "actual > horizon * stepwise" + tag);
    c.require(reg.end >= -1e-10, "negative regret" + tag);
  }
}

// 3. The exact player regret and the lifted flow regret differ by at most the
// computable transfer budget on the smooth crowd game, and the simulated
// empirical gap shrinks from 2 to 8 players.
void crit_approx_sandwich(Checker& c) {
  const GameSpec g = builtin_game("crowd");
  const Evaluator e = Evaluator::from_game(g);
  c.require(g.evaluator.kind == EvaluatorSpec::Kind::expected_sum,
            "crowd must evaluate expected sums");
  const PolicyProfile one(*g.policy, 1);
  const MfRegret mfr = mf_regret(g, e, lift_flow(g, one));
  const Modulus theta = profile_theta(one);
  for (int n : {2, 4, 8}) {
    const double avg = np_regret(g, e, PolicyProfile(*g.policy, n)).stepwise;
    const double gap = std::abs(avg - mfr.stepwise);
    const double bound = error_budget(g, e, n, theta).regret_transfer;
    c.require(std::isfinite(bound), "budget must be finite at n=" + std::to_string(n));
    c.require(gap <= bound, "gap " + std::to_string(gap) + " exceeds budget " +
                                std::to_string(bound) + " at n=" + std::to_string(n));
  }
  const GapResult g2 = empirical_gap(g, one, 2, 400, 31);
  const GapResult g8 = empirical_gap(g, one, 8, 400, 31);
  double sum2 = 0.0, sum8 = 0.0;
  for (double v : g2.estimate) sum2 += v;
  for (double v : g8.estimate) sum8 += v;
  c.require(sum8 < sum2, "empirical gap did not shrink (" + std::to_string(sum8) +
                             " vs " + std::to_string(sum2) + ")");
}

// 4. Players replaying a consistent flow's induced policy have regrets within
// the no-feedback transfer budget of the flow's own regret, and the lift of
// that profile reproduces the flow exactly.
void crit_induced_profiles(Checker& c) {
  std::vector<GameSpec> games;
  games.push_back(builtin_game("crowd"));
  games.push_back(testutil::random_game(4101, 2, 2, 3, true, false));
  games.push_back(testutil::random_game(4102, 2, 2, 4, true, false));
  games.push_back(testutil::random_game(4103, 2, 3, 3, false, false));
  games.push_back(testutil::random_game(4104, 2, 2, 3, false, true));

  for (std::size_t i = 0; i < games.size(); ++i) {
    const GameSpec& g = games[i];
    const Evaluator e = Evaluator::from_game(g);
    SolveOptions opts;
    opts.tol = 1e-8;
    opts.max_iter = 400;
    opts.seed = 11 + i;
    const MeanFieldFlow flow = solve_mfe(g, e, opts).flow;
    const double mfr = mf_regret(g, e, flow, 1e-10).stepwise;

    PolicySpec pol;
    pol.kind = PolicySpec::Kind::oblivious_table;
    pol.name = "induced";
    pol.table = induced_rows(flow);
    pol.vartheta = zero_modulus();

    const std::string tag = " (flow " + std::to_string(i) + ")";
    for (int n : {2, 4, 8}) {
      const MeanFieldFlow relift = lift_flow(g, PolicyProfile(pol, n));
      double diff = 0.0;
      for (int t = 0; t < flow.steps(); ++t)
        diff = std::max(diff, testutil::max_abs_diff(
                                  relift.psi[static_cast<std::size_t>(t)].w,
                                  flow.psi[static_cast<std::size_t>(t)].w));
      c.require(diff <= 1e-12, "lift does not reproduce the flow" + tag);

      const double player = np_regret(g, e, PolicyProfile(pol, n)).stepwise;
      const double bound = error_budget(g, e, n, zero_modulus()).induced_transfer;
      c.require(std::abs(player - mfr) <= bound,
                "induced-profile gap " + std::to_string(std::abs(player - mfr)) +
                    " exceeds budget " + std::to_string(bound) + " at n=" +
                    std::to_string(n) + tag);
    }
  }
}

// 5. Monte Carlo concentration of empirical measures stays under the computed
// rate on a 4-point space, falls along a doubling schedule, and reproduces
// the exact two-sample value 1/4.
void crit_concentration(Checker& c) {
  const FiniteMetricSpace four = builtin_game("four_point").states;
  double prev = 2.0;
  for (std::int64_t n : {10, 100, 1000, 10000}) {
    const std::vector<Dist> mus(static_cast<std::size_t>(n), uniform_dist(4));
    const ConcentrationResult r = concentration(four, mus, 1000, 77);
    const std::string tag = " at n=" + std::to_string(n);
    c.require(r.estimate <= r.bound + 3.0 * std::max(r.se, 1e-12),
              "estimate above bound" + tag);
    c.require(r.estimate < prev, "estimates not decreasing" + tag);
    prev = r.estimate;
  }
  const FiniteMetricSpace two = discrete_space(2, 2.0);
  const ConcentrationResult r =
      concentration(two, std::vector<Dist>(2, uniform_dist(2)), 1000, 78);
  c.require(std::abs(r.estimate - 0.25) <= 3.0 * std::max(r.se, 1e-12),
            "two-sample estimate " + std::to_string(r.estimate) +
                " misses the exact 0.25");
}

// 6. The equilibrium search matches the backward-induction oracle on a
// population-independent game, certifies the crowd game, and its reported
// regret is reproducible from the returned flow.
void crit_solver(Checker& c) {
  const GameSpec chain = builtin_game("chain");
  const Evaluator ce = Evaluator::from_game(chain);
  SolveOptions copt;
  copt.tol = 1e-10;
  const SolveReport crep = solve_mfe(chain, ce, copt);
  c.require(crep.converged, "chain solve did not certify");
  c.require(crep.iterations <= 2, "chain solve took more than 2 iterations");
  c.require(testutil::flow_distance(chain, crep.flow,
                                    oracle::dp_flow_xi_independent(chain)) <= 1e-9,
            "chain flow differs from the backward-induction oracle");
  c.close(mf_regret(chain, ce, crep.flow, 1e-12).stepwise, crep.mfr, 1e-12,
          "chain certification is not reproducible");

  const GameSpec crowd = builtin_game("crowd");
  const Evaluator we = Evaluator::from_game(crowd);
  SolveOptions wopt;
  wopt.tol = 1e-6;
  wopt.max_iter = 500;
  const SolveReport wrep = solve_mfe(crowd, we, wopt);
  c.require(wrep.converged && wrep.mfr <= 1e-6, "crowd solve did not certify at 1e-6");
  c.require(wrep.iterations <= 500, "crowd solve exceeded its iteration budget");
  c.close(mf_regret(crowd, we, wrep.flow, 1e-12).stepwise, wrep.mfr, 1e-12,
          "crowd certification is not reproducible");
}

// 7. The risk-averse evaluation operator satisfies its declared assumptions
// on mass random samples, and the direct stepwise regret route agrees with
// the generic one.
void crit_evaluator_assumptions(Checker& c) {
  testutil::TRand r(4201);
  int bad_mono = 0, bad_contr = 0, bad_convex = 0;
  for (int i = 0; i < 10000; ++i) {
    const int m = 2 + r.ui(7);
    const double kappa = 0.05 + 0.95 * r.u();
    std::vector<double> p(static_cast<std::size_t>(m));
    for (auto& x : p) x = r.u();
    double mass = 0.0;
    for (double x : p) mass += x;
    for (auto& x : p) x /= mass;
    std::vector<double> v(static_cast<std::size_t>(m)), w(static_cast<std::size_t>(m));
    for (auto& x : v) x = r.u(-3.0, 3.0);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = v[k] + r.u(0.0, 2.0);

    if (avar_value(kappa, v, p) > avar_value(kappa, w, p) + 1e-9) ++bad_mono;

    std::vector<double> u(static_cast<std::size_t>(m));
    for (auto& x : u) x = r.u(-3.0, 3.0);
    double l1 = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) l1 += p[k] * std::abs(v[k] - u[k]);
    if (std::abs(avar_value(kappa, v, p) - avar_value(kappa, u, p)) >
        l1 / kappa + 1e-9)
      ++bad_contr;
  }
  const GameSpec g = testutil::random_game(4202, 3, 3, 3, true, true);
  const Evaluator e = Evaluator::from_game(g);
  for (int i = 0; i < 10000; ++i) {
    const Dist xi = testutil::rand_dist(r, 3);
    const Dist l1 = testutil::rand_dist(r, 3);
    const Dist l2 = testutil::rand_dist(r, 3);
    const double gamma = r.u();
    std::vector<double> v(3);
    for (auto& x : v) x = r.u(-2.0, 2.0);
    std::vector<double> mixw(3);
    for (int k = 0; k < 3; ++k) mixw[k] = gamma * l1[k] + (1.0 - gamma) * l2[k];
    const Dist mix = make_dist(std::move(mixw));
    const int t = 1 + i % (g.horizon - 1);
    const int x = i % 3;
    const double lhs = mf_score(g, e, t, x, xi, mix, v);
    const double rhs = gamma * mf_score(g, e, t, x, xi, l1, v) +
                       (1.0 - gamma) * mf_score(g, e, t, x, xi, l2, v);
    if (lhs > rhs + 1e-9) ++bad_convex;
  }
  c.require(bad_mono == 0, std::to_string(bad_mono) + " monotonicity violations");
  c.require(bad_contr == 0, std::to_string(bad_contr) + " contraction violations");
  c.require(bad_convex == 0, std::to_string(bad_convex) + " convexity violations");

  for (int i = 0; i < 20; ++i) {
    const GameSpec rg =
        testutil::random_game(4300 + static_cast<std::uint64_t>(i) * 3, 2 + i % 2,
                              2, 3 + i % 2, i % 3 != 0, i % 2 == 1);
    const Evaluator re = Evaluator::from_game(rg);
    const MeanFieldFlow flow =
        testutil::random_flow(4400 + static_cast<std::uint64_t>(i) * 3, rg);
    const double direct = mf_regret_direct(rg, re, flow);
    const double generic = mf_regret(rg, re, flow).stepwise;
    c.require(std::abs(direct - generic) <= 1e-9,
              "direct and generic stepwise regret split on flow " +
                  std::to_string(i));
  }
}

// 8. Library outputs match brute-force enumeration: the stepwise regret of
// exact two-player games against every deterministic deviation table, and
// the BL distance against LP vertex enumeration on small spaces.
void crit_oracles(Checker& c) {
  for (int i = 0; i < 10; ++i) {
    const GameSpec g = testutil::random_game(
        4500 + static_cast<std::uint64_t>(i) * 11, 2, 2, 2, true, i >= 5);
    const Evaluator e = Evaluator::from_game(g);
    const PolicyProfile prof(
        testutil::random_policy(4600 + static_cast<std::uint64_t>(i) * 11, g), 2);
    const NpRegret reg = np_regret(g, e, prof);
    const double oracle_end = oracle::exhaustive_end_regret_2p2t(g, e, prof);
    const std::string tag = " (game " + std::to_string(i) + ")";
    c.require(std::abs(reg.end - oracle_end) <= 1e-12,
              "end regret differs from exhaustive enumeration" + tag);
    if (g.evaluator.kind == EvaluatorSpec::Kind::expected_sum)
      c.require(std::abs(reg.stepwise - oracle_end) <= 1e-12,
                "stepwise regret differs from exhaustive enumeration" + tag);
    else
      c.require(oracle_end <= reg.stepwise + 1e-12,
                "stepwise regret below the end regret" + tag);
  }

  const std::vector<FiniteMetricSpace> spaces = {
      builtin_game("no_one_get_it").states, builtin_game("chain").states,
      builtin_game("four_point").states, discrete_space(2, 2.0),
      make_space({"a", "b", "c"}, {0, 0.4, 1.3, 0.4, 0, 1.6, 1.3, 1.6, 0})};
  testutil::TRand r(4701);
  for (const auto& s : spaces)
    for (int i = 0; i < 25; ++i) {
      const Dist p = testutil::rand_dist(r, s.size());
      const Dist q = testutil::rand_dist(r, s.size());
      c.require(std::abs(bl_distance(s, p, q) - oracle::bl_vertex(s, p, q)) <= 1e-9,
                "BL distance differs from vertex enumeration on " + s.labels[0]);
    }
}

struct Criterion {
  const char* name;
  double seconds_limit;
  std::function<void(Checker&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"counterexample reproduction (exact players, regretful lift)", 1.0,
       crit_counterexample},
      {"expected-sum end/stepwise identity and regret sandwich", 30.0,
       crit_expected_sum_identity},
      {"player-to-mean-field regret transfer within budget", 60.0,
       crit_approx_sandwich},
      {"induced profiles reproduce flows within no-feedback budget", 60.0,
       crit_induced_profiles},
      {"empirical-measure concentration under the computed rate", 60.0,
       crit_concentration},
      {"equilibrium search against oracle with independent certification", 30.0,
       crit_solver},
      {"risk evaluator assumptions and direct regret agreement", 30.0,
       crit_evaluator_assumptions},
      {"exhaustive deviation and BL vertex oracles", 10.0, crit_oracles},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].run(c);
    } catch (const std::exception& e) {
      c.fails.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (secs > criteria[i].seconds_limit)
      c.fails.push_back("exceeded time budget (" + std::to_string(secs) + " s > " +
                        std::to_string(criteria[i].seconds_limit) + " s)");
    const bool ok = c.fails.empty();
    failed += ok ? 0 : 1;
    std::printf("[%s] %zu. %s (%.2f s)\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name, secs);
    for (const auto& f : c.fails) std::printf("       - %s\n", f.c_str());
  }
  if (failed == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", failed);
  return 1;
}
