#ifndef MFG_SPACES_HPP
#define MFG_SPACES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mfg/error.hpp"

namespace mfg {

// Finite metric space. The metric is stored dense (row-major), validated to be
// symmetric with zero diagonal, strictly positive off the diagonal, and
// triangle-closed. Products carry the sum of the component metrics.
struct FiniteMetricSpace {
  std::vector<std::string> labels;
  std::vector<double> metric;  // size() * size(), row-major

  int size() const { return static_cast<int>(labels.size()); }
  double dist(int i, int j) const { return metric[static_cast<size_t>(i) * labels.size() + j]; }

  bool operator==(const FiniteMetricSpace&) const = default;
};

// Validates the metric axioms eagerly; throws ValidationError on any breach.
FiniteMetricSpace make_space(std::vector<std::string> labels, std::vector<double> metric);

// Convenience: n points pairwise at distance d.
FiniteMetricSpace discrete_space(int n, double d = 1.0, const std::string& prefix = "s");

// Product with the sum metric; labels joined as "a|b".
FiniteMetricSpace product_space(const FiniteMetricSpace& a, const FiniteMetricSpace& b);

// Probability vector on a finite space.
struct Dist {
  std::vector<double> w;

  int size() const { return static_cast<int>(w.size()); }
  double operator[](int i) const { return w[static_cast<size_t>(i)]; }

  bool operator==(const Dist&) const = default;
};

// Validates nonnegativity and unit mass (tol 1e-12); clamps sub-tolerance noise.
Dist make_dist(std::vector<double> w);
Dist dirac(int n, int at);
Dist uniform_dist(int n);

// Joint distribution over state x action, row-major over states.
struct JointDist {
  int nx = 0, na = 0;
  std::vector<double> w;  // size nx * na

  double at(int x, int a) const { return w[static_cast<size_t>(x) * na + a]; }
  double& at(int x, int a) { return w[static_cast<size_t>(x) * na + a]; }

  bool operator==(const JointDist&) const = default;
};

JointDist make_joint(int nx, int na, std::vector<double> w);
Dist joint_state_marginal(const JointDist& psi);

// psi(x,a) = xi(x) * rows[x](a).
JointDist compose_joint(const Dist& xi, const std::vector<Dist>& rows);

// Bounded-Lipschitz distance with the 1/2 factor:
//   sup over |h| <= 1, 1-Lipschitz of (1/2)|sum h (p - q)|,
// solved as a dense LP (see spaces.cpp). Result lies in [0, 1].
double bl_distance(const FiniteMetricSpace& space, const Dist& p, const Dist& q);

// Total-variation distance with the 1/2 factor: (1/2) sum |p - q|.
double tv_distance(const Dist& p, const Dist& q);

// Certified upper bound on the number of 1/j sup-balls needed to cover the unit
// BL ball of the space, by depth-first enumeration of per-point value grids.
// Guarded to spaces with at most 8 points; supply counts externally beyond that.
std::int64_t covering_number_upper(const FiniteMetricSpace& space, int j);

}  // namespace mfg

#endif  // MFG_SPACES_HPP
