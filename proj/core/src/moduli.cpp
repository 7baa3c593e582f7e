#include "mfg/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mfg {

namespace {

// Smallest admissible L for the constraint L > 1 + gate(2/L). The gap
// L - 1 - gate(2/L) is nondecreasing in L, so bisection finds the boundary.
double admissible_floor(const std::function<double(double)>& gate) {
  auto gap = [&](double L) { return L - 1.0 - gate(2.0 / L); };
  double hi = 2.0;
  while (gap(hi) <= 0.0 && hi < 1e12) hi *= 2.0;
  double lo = 1.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (gap(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

double inf_over_L(double slope, const std::function<double(double)>& penalty,
                  const std::function<double(double)>& gate, double l_max) {
  if (std::isinf(slope)) return kInf;
  double floor = admissible_floor(gate);
  if (floor >= l_max) l_max = 2.0 * floor;
  auto f = [&](double L) { return slope * L + penalty(2.0 / L); };

  // Log grid over the admissible interval, then refine around the best node.
  const int grid = 256;
  double lo = floor * (1.0 + 1e-9);
  double ratio = std::pow(l_max / lo, 1.0 / (grid - 1));
  double best_val = kInf;
  int best_idx = 0;
  std::vector<double> nodes(grid);
  for (int i = 0; i < grid; ++i) {
    nodes[i] = lo * std::pow(ratio, i);
    double v = f(nodes[i]);
    if (v < best_val) {
      best_val = v;
      best_idx = i;
    }
  }
  if (std::isinf(best_val)) return best_val;

  double a = nodes[std::max(0, best_idx - 1)];
  double b = nodes[std::min(grid - 1, best_idx + 1)];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 200; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return std::min(best_val, std::min(f1, f2));
}

}  // namespace mfg
