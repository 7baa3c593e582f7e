#include "mfg/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace mfg {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kMetricTol = 1e-12;

// Dense tableau simplex for: maximize c.x subject to A.x <= b, x >= 0, with
// b >= 0 so the slack basis is feasible from the start. Bland's rule keeps the
// tiny instances we solve (<= ~64 variables) cycle-free. Returns the optimum.
double simplex_max(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                   const std::vector<double>& b) {
  const int n = static_cast<int>(c.size());
  const int m = static_cast<int>(A.size());
  const int cols = n + m + 1;  // structural, slack, rhs
  std::vector<std::vector<double>> tab(m + 1, std::vector<double>(cols, 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) tab[i][j] = A[i][j];
    tab[i][n + i] = 1.0;
    tab[i][cols - 1] = b[i];
  }
  for (int j = 0; j < n; ++j) tab[m][j] = -c[j];  // objective row, maximize

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  constexpr double eps = 1e-11;
  for (int iter = 0; iter < 20000; ++iter) {
    int pivot_col = -1;
    for (int j = 0; j < cols - 1; ++j) {
      if (tab[m][j] < -eps) {
        pivot_col = j;  // Bland: lowest eligible index
        break;
      }
    }
    if (pivot_col < 0) return tab[m][cols - 1];

    int pivot_row = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < m; ++i) {
      if (tab[i][pivot_col] > eps) {
        const double ratio = tab[i][cols - 1] / tab[i][pivot_col];
        if (pivot_row < 0 || ratio < best_ratio - eps ||
            (ratio < best_ratio + eps && basis[i] < basis[pivot_row])) {
          pivot_row = i;
          best_ratio = ratio;
        }
      }
    }
    if (pivot_row < 0)
      throw ConsistencyError("simplex: unbounded objective on a bounded polytope");

    const double pv = tab[pivot_row][pivot_col];
    for (int j = 0; j < cols; ++j) tab[pivot_row][j] /= pv;
    for (int i = 0; i <= m; ++i) {
      if (i == pivot_row) continue;
      const double f = tab[i][pivot_col];
      if (f == 0.0) continue;
      for (int j = 0; j < cols; ++j) tab[i][j] -= f * tab[pivot_row][j];
    }
    basis[pivot_row] = pivot_col;
  }
  throw ConsistencyError("simplex: iteration cap hit");
}

}  // namespace

FiniteMetricSpace make_space(std::vector<std::string> labels, std::vector<double> metric) {
  const size_t n = labels.size();
  if (n == 0) throw ValidationError("space: needs at least one point");
  if (metric.size() != n * n)
    throw ValidationError("space: metric must be a square matrix matching the labels");
  for (size_t i = 0; i < n; ++i) {
    if (std::abs(metric[i * n + i]) > kMetricTol)
      throw ValidationError("space: metric diagonal must be zero");
    metric[i * n + i] = 0.0;
    for (size_t j = 0; j < n; ++j) {
      const double d = metric[i * n + j];
      if (!(d >= 0.0) || !std::isfinite(d))
        throw ValidationError("space: metric entries must be finite and nonnegative");
      if (i != j && d <= 0.0)
        throw ValidationError("space: distinct points need positive distance");
      if (std::abs(d - metric[j * n + i]) > kMetricTol)
        throw ValidationError("space: metric must be symmetric");
    }
  }
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t k = 0; k < n; ++k)
        if (metric[i * n + j] > metric[i * n + k] + metric[k * n + j] + kMetricTol)
          throw ValidationError("space: triangle inequality violated at (" + labels[i] + "," +
                                labels[j] + "," + labels[k] + ")");
  return FiniteMetricSpace{std::move(labels), std::move(metric)};
}

FiniteMetricSpace discrete_space(int n, double d, const std::string& prefix) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
  std::vector<double> metric(static_cast<size_t>(n) * n, d);
  for (int i = 0; i < n; ++i) metric[static_cast<size_t>(i) * n + i] = 0.0;
  return make_space(std::move(labels), std::move(metric));
}

FiniteMetricSpace product_space(const FiniteMetricSpace& a, const FiniteMetricSpace& b) {
  const int na = a.size(), nb = b.size();
  std::vector<std::string> labels;
  labels.reserve(static_cast<size_t>(na) * nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) labels.push_back(a.labels[i] + "|" + b.labels[j]);
  const size_t n = labels.size();
  std::vector<double> metric(n * n, 0.0);
  for (int i1 = 0; i1 < na; ++i1)
    for (int j1 = 0; j1 < nb; ++j1)
      for (int i2 = 0; i2 < na; ++i2)
        for (int j2 = 0; j2 < nb; ++j2)
          metric[(static_cast<size_t>(i1) * nb + j1) * n + (static_cast<size_t>(i2) * nb + j2)] =
              a.dist(i1, i2) + b.dist(j1, j2);
  return make_space(std::move(labels), std::move(metric));
}

Dist make_dist(std::vector<double> w) {
  if (w.empty()) throw ValidationError("dist: empty weight vector");
  double total = 0.0;
  for (double& x : w) {
    if (!std::isfinite(x)) throw ValidationError("dist: weights must be finite");
    if (x < 0.0) {
      if (x < -kMassTol) throw ValidationError("dist: negative weight");
      x = 0.0;  // round-off noise
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw ValidationError("dist: weights sum to " + std::to_string(total) + ", expected 1");
  return Dist{std::move(w)};
}

Dist dirac(int n, int at) {
  std::vector<double> w(static_cast<size_t>(n), 0.0);
  w[static_cast<size_t>(at)] = 1.0;
  return Dist{std::move(w)};
}

Dist uniform_dist(int n) {
  return Dist{std::vector<double>(static_cast<size_t>(n), 1.0 / n)};
}

JointDist make_joint(int nx, int na, std::vector<double> w) {
  if (nx <= 0 || na <= 0 || w.size() != static_cast<size_t>(nx) * na)
    throw ValidationError("joint: dimension mismatch");
  double total = 0.0;
  for (double& x : w) {
    if (!std::isfinite(x)) throw ValidationError("joint: weights must be finite");
    if (x < 0.0) {
      if (x < -kMassTol) throw ValidationError("joint: negative weight");
      x = 0.0;
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw ValidationError("joint: total mass " + std::to_string(total) + ", expected 1");
  return JointDist{nx, na, std::move(w)};
}

Dist joint_state_marginal(const JointDist& psi) {
  std::vector<double> w(static_cast<size_t>(psi.nx), 0.0);
  for (int x = 0; x < psi.nx; ++x)
    for (int a = 0; a < psi.na; ++a) w[static_cast<size_t>(x)] += psi.at(x, a);
  return Dist{std::move(w)};
}

JointDist compose_joint(const Dist& xi, const std::vector<Dist>& rows) {
  const int nx = xi.size();
  if (static_cast<int>(rows.size()) != nx)
    throw ValidationError("compose_joint: one action row per state required");
  const int na = rows.empty() ? 0 : rows[0].size();
  JointDist psi{nx, na, std::vector<double>(static_cast<size_t>(nx) * na, 0.0)};
  for (int x = 0; x < nx; ++x) {
    if (rows[static_cast<size_t>(x)].size() != na)
      throw ValidationError("compose_joint: ragged action rows");
    for (int a = 0; a < na; ++a) psi.at(x, a) = xi[x] * rows[static_cast<size_t>(x)][a];
  }
  return psi;
}

double bl_distance(const FiniteMetricSpace& space, const Dist& p, const Dist& q) {
  const int n = space.size();
  if (p.size() != n || q.size() != n)
    throw ValidationError("bl_distance: distribution size does not match the space");
  if (p.w == q.w) return 0.0;

  // Variables x = h + 1 >= 0 keep the rhs nonnegative; the objective shift
  // vanishes because sum (p - q) = 0.
  std::vector<double> c(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) c[static_cast<size_t>(i)] = p[i] - q[i];

  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(static_cast<size_t>(n), 0.0);
    row[static_cast<size_t>(i)] = 1.0;
    A.push_back(std::move(row));
    b.push_back(2.0);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<double> row(static_cast<size_t>(n), 0.0);
      row[static_cast<size_t>(i)] = 1.0;
      row[static_cast<size_t>(j)] = -1.0;
      A.push_back(std::move(row));
      b.push_back(space.dist(i, j));
    }

  const double opt = simplex_max(c, A, b);
  return std::max(0.0, 0.5 * opt);
}

double tv_distance(const Dist& p, const Dist& q) {
  if (p.size() != q.size()) throw ValidationError("tv_distance: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

namespace {

// A grid assignment g is kept iff some h with |h| <= 1, Lip(h) <= metric stays
// within sup-distance 1/j of g. With per-point intervals [lo, hi] that is a
// difference-constraint system; on a triangle-closed metric it is feasible iff
// lo_i <= hi_i for all i and lo_i - d_ij <= hi_j for all i != j (the witness
// h_i = min_j(hi_j + d_ij) works).
struct CoverDfs {
  const FiniteMetricSpace& space;
  int j;
  std::vector<double> lo, hi;
  std::int64_t count = 0;

  explicit CoverDfs(const FiniteMetricSpace& s, int jj) : space(s), j(jj) {
    lo.resize(static_cast<size_t>(s.size()));
    hi.resize(static_cast<size_t>(s.size()));
  }

  bool feasible_prefix(int upto) const {
    for (int i = 0; i <= upto; ++i) {
      if (lo[static_cast<size_t>(i)] > hi[static_cast<size_t>(i)] + 1e-15) return false;
      for (int k = 0; k <= upto; ++k)
        if (i != k &&
            lo[static_cast<size_t>(i)] - space.dist(i, k) > hi[static_cast<size_t>(k)] + 1e-15)
          return false;
    }
    return true;
  }

  void run(int point) {
    const int n = space.size();
    if (point == n) {
      ++count;
      return;
    }
    const double r = 1.0 / j;
    for (int k = 0; k < j; ++k) {
      const double center = -1.0 + (2.0 * k + 1.0) / j;
      lo[static_cast<size_t>(point)] = std::max(-1.0, center - r);
      hi[static_cast<size_t>(point)] = std::min(1.0, center + r);
      if (feasible_prefix(point)) run(point + 1);
    }
  }
};

}  // namespace

std::int64_t covering_number_upper(const FiniteMetricSpace& space, int j) {
  if (j < 1) throw ValidationError("covering: j must be a positive integer");
  if (space.size() > 8)
    throw CapacityError(
        "covering: enumeration is guarded to spaces with <= 8 points; supply the covering "
        "count externally for larger spaces");
  CoverDfs dfs(space, j);
  dfs.run(0);
  return dfs.count;
}

}  // namespace mfg
