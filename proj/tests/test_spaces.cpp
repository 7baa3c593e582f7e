#include <cmath>
#include <vector>

#include "doctest.h"
#include "mfg/error.hpp"
#include "mfg/spaces.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace mfg;

TEST_CASE("spaces: metric axioms are enforced at construction") {
  CHECK_THROWS_AS(make_space({}, {}), ValidationError);
  CHECK_THROWS_AS(make_space({"a", "b"}, {0, 1, 1}), ValidationError);
  CHECK_THROWS_AS(make_space({"a", "b"}, {0, 1, 2, 0}), ValidationError);   // asymmetric
  CHECK_THROWS_AS(make_space({"a", "b"}, {0.5, 1, 1, 0}), ValidationError); // nonzero diagonal
  CHECK_THROWS_AS(make_space({"a", "b"}, {0, 0, 0, 0}), ValidationError);   // zero off-diagonal
  CHECK_THROWS_AS(make_space({"a", "b"}, {0, -1, -1, 0}), ValidationError);
  // 1 + 1 < 5 breaks the triangle inequality.
  CHECK_THROWS_AS(make_space({"a", "b", "c"}, {0, 1, 5, 1, 0, 1, 5, 1, 0}),
                  ValidationError);
  const FiniteMetricSpace ok = make_space({"a", "b", "c"}, {0, 1, 2, 1, 0, 1, 2, 1, 0});
  CHECK(ok.size() == 3);
  CHECK(ok.dist(0, 2) == 2.0);
}

TEST_CASE("spaces: discrete_space builds the uniform metric") {
  const FiniteMetricSpace s = discrete_space(3, 2.0, "q");
  CHECK(s.size() == 3);
  CHECK(s.labels[0] == "q0");
  CHECK(s.dist(0, 1) == 2.0);
  CHECK(s.dist(1, 1) == 0.0);
}

TEST_CASE("spaces: product space carries the sum metric") {
  const FiniteMetricSpace a = discrete_space(2, 2.0, "x");
  const FiniteMetricSpace b = discrete_space(3, 2.0, "a");
  const FiniteMetricSpace p = product_space(a, b);
  CHECK(p.size() == 6);
  CHECK(p.labels[0] == "x0|a0");
  // Index layout is row-major over the first factor.
  CHECK(p.dist(0, 1) == 2.0);       // same x, different a
  CHECK(p.dist(0, 3) == 2.0);       // different x, same a
  CHECK(p.dist(0, 4) == 4.0);       // both differ
}

TEST_CASE("spaces: make_dist validates mass and sign") {
  CHECK_THROWS_AS(make_dist({0.5, 0.4}), ValidationError);
  CHECK_THROWS_AS(make_dist({1.5, -0.5}), ValidationError);
  CHECK_THROWS_AS(make_dist({}), ValidationError);
  const Dist d = make_dist({0.25, 0.75});
  CHECK(d[1] == 0.75);
  CHECK(dirac(3, 1).w == std::vector<double>{0, 1, 0});
  CHECK(uniform_dist(4)[2] == 0.25);
}

TEST_CASE("spaces: tv distance frozen examples") {
  const Dist p = make_dist({0.7, 0.3});
  CHECK(tv_distance(p, p) == 0.0);
  CHECK(tv_distance(make_dist({0.7, 0.3}), make_dist({0.4, 0.6})) ==
        doctest::Approx(0.3).epsilon(1e-12));
  CHECK(tv_distance(dirac(2, 0), dirac(2, 1)) == doctest::Approx(1.0));
  // Disjoint supports on a larger space.
  CHECK(tv_distance(make_dist({0.5, 0.5, 0, 0}), make_dist({0, 0, 0.5, 0.5})) ==
        doctest::Approx(1.0));
}

TEST_CASE("spaces: bl distance frozen examples") {
  const FiniteMetricSpace far = make_space({"x", "y"}, {0, 3, 3, 0});
  const FiniteMetricSpace near = make_space({"x", "y"}, {0, 1, 1, 0});
  CHECK(bl_distance(far, dirac(2, 0), dirac(2, 1)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bl_distance(near, dirac(2, 0), dirac(2, 1)) == doctest::Approx(0.5).epsilon(1e-9));
  const Dist p = make_dist({0.2, 0.8});
  CHECK(bl_distance(far, p, p) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("spaces: bl equals tv when all pairs are at distance >= 2") {
  testutil::TRand r(401);
  const FiniteMetricSpace s2 = discrete_space(2, 2.0);
  const FiniteMetricSpace s4 = discrete_space(4, 2.5);
  for (int i = 0; i < 50; ++i) {
    const Dist p2 = testutil::rand_dist(r, 2), q2 = testutil::rand_dist(r, 2);
    CHECK(bl_distance(s2, p2, q2) == doctest::Approx(tv_distance(p2, q2)).epsilon(1e-9));
    const Dist p4 = testutil::rand_dist(r, 4), q4 = testutil::rand_dist(r, 4);
    CHECK(bl_distance(s4, p4, q4) == doctest::Approx(tv_distance(p4, q4)).epsilon(1e-9));
  }
}

TEST_CASE("spaces: bl distance is a metric bounded by 1") {
  testutil::TRand r(402);
  const FiniteMetricSpace s = make_space({"a", "b", "c"}, {0, 0.5, 1.5, 0.5, 0, 1, 1.5, 1, 0});
  for (int i = 0; i < 40; ++i) {
    const Dist p = testutil::rand_dist(r, 3);
    const Dist q = testutil::rand_dist(r, 3);
    const Dist m = testutil::rand_dist(r, 3);
    const double pq = bl_distance(s, p, q);
    CHECK(pq >= 0.0);
    CHECK(pq <= 1.0 + 1e-12);
    CHECK(pq == doctest::Approx(bl_distance(s, q, p)).epsilon(1e-9));
    CHECK(pq <= bl_distance(s, p, m) + bl_distance(s, m, q) + 1e-9);
  }
}

TEST_CASE("spaces: bl LP agrees with vertex enumeration oracle") {
  testutil::TRand r(403);
  // A handful of deliberately uneven metrics, 2 to 4 points.
  std::vector<FiniteMetricSpace> spaces = {
      make_space({"a", "b"}, {0, 0.7, 0.7, 0}),
      make_space({"a", "b"}, {0, 2.4, 2.4, 0}),
      make_space({"a", "b", "c"}, {0, 0.5, 1.5, 0.5, 0, 1, 1.5, 1, 0}),
      discrete_space(3, 1.0),
      make_space({"a", "b", "c", "d"},
                 {0, 1, 2, 2, 1, 0, 1, 2, 2, 1, 0, 1, 2, 2, 1, 0}),
      discrete_space(4, 2.0),
  };
  for (const auto& s : spaces) {
    for (int i = 0; i < 25; ++i) {
      const Dist p = testutil::rand_dist(r, s.size());
      const Dist q = testutil::rand_dist(r, s.size());
      const double lib = bl_distance(s, p, q);
      const double ora = oracle::bl_vertex(s, p, q);
      CHECK(lib == doctest::Approx(ora).epsilon(1e-9));
    }
    // Dirac pairs exercise the polytope corners.
    for (int x = 0; x < s.size(); ++x)
      for (int y = 0; y < s.size(); ++y) {
        const double lib = bl_distance(s, dirac(s.size(), x), dirac(s.size(), y));
        const double ora = oracle::bl_vertex(s, dirac(s.size(), x), dirac(s.size(), y));
        CHECK(lib == doctest::Approx(ora).epsilon(1e-9));
      }
  }
}

TEST_CASE("spaces: covering count frozen examples") {
  const FiniteMetricSpace one = make_space({"p"}, {0});
  CHECK(covering_number_upper(one, 1) == 1);
  CHECK(covering_number_upper(one, 2) == 2);
  const FiniteMetricSpace two = discrete_space(2, 2.0);
  CHECK(covering_number_upper(two, 1) == 1);
  // d >= 2 imposes no coupling, so the count is the full grid j^m.
  CHECK(covering_number_upper(two, 2) == 4);
  CHECK(covering_number_upper(discrete_space(3, 2.0), 3) == 27);
}

TEST_CASE("spaces: covering count matches the enumeration oracle") {
  std::vector<FiniteMetricSpace> spaces = {
      make_space({"p"}, {0}),
      discrete_space(2, 2.0),
      make_space({"a", "b"}, {0, 0.5, 0.5, 0}),
      make_space({"a", "b", "c"}, {0, 0.5, 1, 0.5, 0, 0.5, 1, 0.5, 0}),
      discrete_space(4, 1.0),
  };
  for (const auto& s : spaces)
    for (int j = 1; j <= 5; ++j) {
      if (std::pow(static_cast<double>(j), s.size()) > 2e6) continue;
      CHECK(covering_number_upper(s, j) == oracle::covering_enumeration(s, j));
    }
}

TEST_CASE("spaces: tight metrics prune the covering grid") {
  // At distance 0.5 the Lipschitz constraint couples the two coordinates once
  // the grid is fine enough, so the feasible count sits strictly below the
  // full 2-d grid.
  const FiniteMetricSpace tight = make_space({"a", "b"}, {0, 0.5, 0.5, 0});
  for (int j = 6; j <= 9; ++j) {
    const std::int64_t n = covering_number_upper(tight, j);
    CHECK(n < static_cast<std::int64_t>(std::pow(j, 2)));
    CHECK(n >= j);  // projecting on one coordinate needs j cells
  }
}

TEST_CASE("spaces: covering enumeration is guarded by size") {
  CHECK_THROWS_AS(covering_number_upper(discrete_space(9, 2.0), 2), CapacityError);
  CHECK_THROWS_AS(covering_number_upper(discrete_space(2, 2.0), 0), ValidationError);
}

TEST_CASE("spaces: joint distributions validate and marginalize") {
  CHECK_THROWS_AS(make_joint(2, 2, {0.5, 0.5, 0.5, 0.5}), ValidationError);
  const JointDist psi = make_joint(2, 2, {0.2, 0.2, 0.0, 0.6});
  CHECK(psi.at(1, 1) == 0.6);
  const Dist xi = joint_state_marginal(psi);
  CHECK(xi[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(xi[1] == doctest::Approx(0.6).epsilon(1e-15));

  const Dist base = make_dist({0.3, 0.7});
  const std::vector<Dist> rows = {make_dist({1.0, 0.0}), make_dist({0.25, 0.75})};
  const JointDist composed = compose_joint(base, rows);
  CHECK(composed.at(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(composed.at(1, 1) == doctest::Approx(0.7 * 0.75).epsilon(1e-15));
  CHECK(joint_state_marginal(composed).w == base.w);
}
