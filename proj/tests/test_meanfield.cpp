#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "mfg/error.hpp"
#include "mfg/evaluator.hpp"
#include "mfg/game.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/regret.hpp"
#include "testutil.hpp"

using namespace mfg;

TEST_CASE("meanfield: one-step push mixes transition rows") {
  const GameSpec g = builtin_game("crowd");
  const Dist xi = make_dist({0.6, 0.4});
  // Dirac action weight returns the row itself (relocation is deterministic).
  CHECK(q_push(g, 1, 0, xi, dirac(2, 1)).w == std::vector<double>{0, 1});
  // Uniform mix averages the two rows.
  const Dist mixed = q_push(g, 1, 0, xi, uniform_dist(2));
  CHECK(mixed[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mixed[1] == doctest::Approx(0.5).epsilon(1e-15));

  // Against a random affine game, recompute by hand.
  const GameSpec ga = testutil::random_game(601, 3, 2, 3, true, false);
  testutil::TRand r(602);
  for (int trial = 0; trial < 20; ++trial) {
    const Dist xi2 = testutil::rand_dist(r, 3);
    const Dist lam = testutil::rand_dist(r, 2);
    const int t = 1 + r.ui(2), x = r.ui(3);
    std::vector<double> manual(3, 0.0);
    for (int a = 0; a < 2; ++a) {
      const Dist row = transition_dist(ga, t, x, xi2, a);
      for (int y = 0; y < 3; ++y) manual[y] += lam[a] * row[y];
    }
    const Dist lib = q_push(ga, t, x, xi2, lam);
    for (int y = 0; y < 3; ++y) CHECK(lib[y] == doctest::Approx(manual[y]).epsilon(1e-13));
  }
}

TEST_CASE("meanfield: joint push equals the marginal composition") {
  const GameSpec g = testutil::random_game(603, 3, 2, 4, true, false);
  const MeanFieldFlow flow = testutil::random_flow(604, g);
  for (int t = 1; t <= flow.steps(); ++t) {
    const JointDist& psi = flow.psi[t - 1];
    const Dist xi = joint_state_marginal(psi);
    std::vector<double> manual(3, 0.0);
    for (int x = 0; x < 3; ++x)
      for (int a = 0; a < 2; ++a) {
        const double w = psi.at(x, a);
        if (w == 0.0) continue;
        const Dist row = transition_dist(g, t, x, xi, a);
        for (int y = 0; y < 3; ++y) manual[y] += w * row[y];
      }
    const Dist lib = q_push(g, t, psi);
    for (int y = 0; y < 3; ++y) CHECK(lib[y] == doctest::Approx(manual[y]).epsilon(1e-13));
  }
}

TEST_CASE("meanfield: counterexample flow narration") {
  const GameSpec g = builtin_game("no_one_get_it");
  const std::vector<Dist> xis = marginal_flow(g, *g.policy);
  REQUIRE(xis.size() == 3);
  CHECK(xis[0].w == std::vector<double>{1, 0});
  CHECK(xis[1].w == std::vector<double>{1, 0});
  CHECK(xis[2][0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(xis[2][1] == doctest::Approx(0.5).epsilon(1e-12));

  const MeanFieldFlow flow = roll_flow(g, *g.policy);
  CHECK(flow_terminal_xi(g, flow)[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("meanfield: uniform policy on doubly stochastic dynamics stays uniform") {
  // Symmetric 2-state chain: uniform rows in both directions.
  GameSpec g;
  g.horizon = 4;
  g.states = discrete_space(2, 2.0, "s");
  g.actions = discrete_space(2, 2.0, "a");
  g.initial = uniform_dist(2);
  g.transition.table.assign(3, {make_dist({1, 0}), make_dist({0, 1}),
                                make_dist({0, 1}), make_dist({1, 0})});
  g.cost.base.assign(3, std::vector<double>(4, 0.0));
  g.terminal.base = {0, 0};
  g.moduli.C0 = 1.0;
  validate_game(g);

  PolicySpec uni = testutil::random_policy(605, g);
  for (auto& step : uni.table)
    for (auto& row : step) row = uniform_dist(2);
  const std::vector<Dist> xis = marginal_flow(g, uni);
  for (const Dist& xi : xis) {
    CHECK(xi[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(xi[1] == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("meanfield: rolled flows are consistent, corrupted flows are caught") {
  for (std::uint64_t seed : {611u, 612u, 613u}) {
    const GameSpec g = testutil::random_game(seed, 3, 2, 4, seed % 2 == 0, false);
    MeanFieldFlow flow = testutil::random_flow(seed + 1, g);
    CHECK(check_mff(g, flow) <= 1e-12);
    const std::vector<double> res = mff_residuals(g, flow);
    CHECK(static_cast<int>(res.size()) == flow.steps());

    // Corrupt the second joint: move mass between states.
    std::vector<double> w = flow.psi[1].w;
    const double shift = 0.25 * w[0];
    w[0] -= shift;
    w[2] += shift;
    flow.psi[1] = make_joint(3, 2, w);
    CHECK(check_mff(g, flow) > 1e-6);
    const Evaluator e = Evaluator::from_game(g);
    CHECK_THROWS_AS(mf_regret(g, e, flow), ConsistencyError);
  }
}

TEST_CASE("meanfield: flow shape validation") {
  const GameSpec g = builtin_game("crowd");
  MeanFieldFlow flow = roll_flow(g, *g.policy);
  CHECK_NOTHROW(validate_flow(g, flow));
  MeanFieldFlow short_flow = flow;
  short_flow.psi.pop_back();
  CHECK_THROWS_AS(validate_flow(g, short_flow), ValidationError);
  MeanFieldFlow wrong_shape = flow;
  wrong_shape.psi[0] = make_joint(3, 2, {0.2, 0.2, 0.2, 0.2, 0.1, 0.1});
  CHECK_THROWS_AS(validate_flow(g, wrong_shape), ValidationError);
}

TEST_CASE("meanfield: induced rows disintegrate the joint") {
  const JointDist psi = make_joint(2, 2, {0.2, 0.2, 0.0, 0.6});
  MeanFieldFlow flow;
  flow.psi = {psi};
  const auto rows = induced_rows(flow);
  CHECK(rows[0][0].w == std::vector<double>{0.5, 0.5});
  CHECK(rows[0][1].w == std::vector<double>{0.0, 1.0});

  // Zero-mass state gets the uniform version.
  const JointDist empty_row = make_joint(2, 2, {0.5, 0.5, 0.0, 0.0});
  flow.psi = {empty_row};
  CHECK(induced_rows(flow)[0][1].w == std::vector<double>{0.5, 0.5});

  // Product joints induce the constant kernel.
  const Dist xi = make_dist({0.3, 0.7});
  const Dist lam = make_dist({0.4, 0.6});
  flow.psi = {compose_joint(xi, {lam, lam})};
  const auto prows = induced_rows(flow);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      CHECK(prows[0][x][a] == doctest::Approx(lam[a]).epsilon(1e-14));
}

TEST_CASE("meanfield: single joint flow has one vacuous residual") {
  GameSpec g = testutil::random_game(621, 2, 2, 2, false, false);
  const MeanFieldFlow flow = testutil::random_flow(622, g);
  REQUIRE(flow.steps() == 1);
  const std::vector<double> res = mff_residuals(g, flow);
  REQUIRE(res.size() == 1);
  CHECK(res[0] <= 1e-14);
}

TEST_CASE("meanfield: backward values dominate policy values") {
  testutil::TRand r(631);
  for (std::uint64_t seed : {641u, 642u, 643u, 644u}) {
    const bool avar = seed % 2 == 0;
    const GameSpec g = testutil::random_game(seed, 3, 2, 4, true, avar);
    const Evaluator e = Evaluator::from_game(g);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<Dist> xis;
      for (int t = 0; t < 4; ++t) xis.push_back(testutil::rand_dist(r, 3));
      const MfBackward opt = mf_bellman(g, e, xis);
      const PolicySpec pol = testutil::random_policy(seed * 100 + rep, g);
      const auto follow = mf_policy_values(g, e, xis, pol);
      for (int t = 0; t < 4; ++t)
        for (int x = 0; x < 3; ++x) CHECK(opt.values[t][x] <= follow[t][x] + 1e-10);

      // The greedy table attains the optimum.
      PolicySpec greedy = pol;
      for (int t = 1; t <= 3; ++t)
        for (int x = 0; x < 3; ++x)
          greedy.table[t - 1][x] = dirac(2, opt.argmin[t - 1][x]);
      const auto attained = mf_policy_values(g, e, xis, greedy);
      for (int t = 0; t < 4; ++t)
        for (int x = 0; x < 3; ++x)
          CHECK(attained[t][x] == doctest::Approx(opt.values[t][x]).epsilon(1e-10));
    }
  }
}

TEST_CASE("meanfield: hand-sized policy and bellman values") {
  // Single state, two actions, c(a0) = 1, c(a1) = 0, zero terminal.
  GameSpec g;
  g.horizon = 2;
  g.states = make_space({"s"}, {0});
  g.actions = discrete_space(2, 2.0, "a");
  g.initial = dirac(1, 0);
  g.transition.table = {{make_dist({1.0}), make_dist({1.0})}};
  g.cost.base = {{1.0, 0.0}};
  g.terminal.base = {0.0};
  g.moduli.C0 = 1.0;
  validate_game(g);
  const Evaluator e = Evaluator::from_game(g);
  const std::vector<Dist> xis(2, dirac(1, 0));

  PolicySpec all_a0;
  all_a0.kind = PolicySpec::Kind::oblivious_table;
  all_a0.table = {{dirac(2, 0)}};
  CHECK(mf_policy_values(g, e, xis, all_a0)[0][0] == doctest::Approx(1.0).epsilon(1e-14));

  const MfBackward opt = mf_bellman(g, e, xis);
  CHECK(opt.values[0][0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(opt.argmin[0][0] == 1);

  // AVaR at level 1 equals the expected-sum values on the same game.
  GameSpec g1 = g;
  g1.evaluator.kind = EvaluatorSpec::Kind::avar;
  g1.evaluator.kappa = 1.0;
  const Evaluator e1 = Evaluator::from_game(g1);
  CHECK(mf_policy_values(g1, e1, xis, all_a0)[0][0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("meanfield: zero cost and terminal give zero values") {
  GameSpec g = testutil::random_game(651, 3, 2, 4, false, false);
  for (auto& step : g.cost.base) std::fill(step.begin(), step.end(), 0.0);
  std::fill(g.terminal.base.begin(), g.terminal.base.end(), 0.0);
  g.moduli.C0 = 1.0;
  const Evaluator e = Evaluator::from_game(g);
  const std::vector<Dist> xis(4, uniform_dist(3));
  const MfBackward opt = mf_bellman(g, e, xis);
  for (const auto& layer : opt.values)
    for (double v : layer) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("meanfield: backward layers obey the growth recursion") {
  for (std::uint64_t seed : {661u, 662u}) {
    const bool avar = seed == 662u;
    const GameSpec g = testutil::random_game(seed, 3, 2, 5, true, avar);
    const Evaluator e = Evaluator::from_game(g);
    testutil::TRand r(seed + 5);
    std::vector<Dist> xis;
    for (int t = 0; t < 5; ++t) xis.push_back(testutil::rand_dist(r, 3));
    const MfBackward opt = mf_bellman(g, e, xis);
    const PolicySpec pol = testutil::random_policy(seed + 9, g);
    const auto follow = mf_policy_values(g, e, xis, pol);
    auto sup = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    };
    for (int t = 3; t >= 0; --t) {
      CHECK(sup(opt.values[t]) <= e.C0 + e.C1 * sup(opt.values[t + 1]) + 1e-10);
      CHECK(sup(follow[t]) <= e.C0 + e.C1 * sup(follow[t + 1]) + 1e-10);
    }
  }
}

TEST_CASE("meanfield: one-step score is jointly continuous within the budget modulus") {
  // On the hand-tuned builtins the declared moduli are honest, so the
  // composed modulus must dominate the observed one-step score deviations.
  testutil::TRand r(671);
  for (const char* name : {"crowd", "four_point", "chain"}) {
    const GameSpec g = builtin_game(name);
    const Evaluator e = Evaluator::from_game(g);
    const int nx = g.states.size(), na = g.actions.size();
    for (int trial = 0; trial < 200; ++trial) {
      const Dist xi = testutil::rand_dist(r, nx), xi2 = testutil::rand_dist(r, nx);
      const Dist lam = testutil::rand_dist(r, na), lam2 = testutil::rand_dist(r, na);
      std::vector<double> v(nx);
      for (double& y : v) y = r.u(-1.0, 1.0);
      const int t = 1 + r.ui(g.horizon - 1), x = r.ui(nx);
      double vmax = 0.0;
      for (double y : v) vmax = std::max(vmax, std::abs(y));

      const double lhs = std::abs(mf_score(g, e, t, x, xi, lam, v) -
                                  mf_score(g, e, t, x, xi2, lam2, v));
      const double rhs = (e.C0 + e.C1 * vmax) *
                         (e.zeta(bl_distance(g.states, xi, xi2)) +
                          e.zeta(bl_distance(g.actions, lam, lam2)));
      CHECK(lhs <= rhs + 1e-9);
    }
  }
}
