#ifndef MFG_MODULI_HPP
#define MFG_MODULI_HPP

#include <cmath>
#include <functional>
#include <limits>

#include "mfg/error.hpp"

namespace mfg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Concave modulus of continuity in one of the declared parametric forms.
// All forms are nondecreasing, subadditive and vanish at 0 by construction.
// `infinite` marks families with no valid modulus (discontinuous policies);
// it maps every positive input to +inf so budgets degrade instead of erroring.
enum class ModulusKind { zero, linear, power, infinite };

struct Modulus {
  ModulusKind kind = ModulusKind::zero;
  double K = 0.0;
  double alpha = 1.0;          // exponent for the power form, in (0, 1]
  double cap = kInf;           // declared ceiling

  double operator()(double ell) const {
    if (ell <= 0.0) return 0.0;
    switch (kind) {
      case ModulusKind::zero:
        return 0.0;
      case ModulusKind::infinite:
        return kInf;
      case ModulusKind::linear:
        return std::min(K * ell, cap);  // K*inf = inf, so an inf input yields the cap
      case ModulusKind::power:
        return std::min(K * std::pow(ell, alpha), cap);
    }
    return 0.0;
  }

  bool is_finite() const { return kind != ModulusKind::infinite; }

  bool operator==(const Modulus&) const = default;
};

inline Modulus zero_modulus() { return Modulus{}; }

inline Modulus linear_modulus(double K, double cap = kInf) {
  if (K < 0.0) throw ValidationError("modulus: linear constant must be >= 0");
  return Modulus{ModulusKind::linear, K, 1.0, cap};
}

inline Modulus power_modulus(double K, double alpha, double cap = kInf) {
  if (K < 0.0) throw ValidationError("modulus: power constant must be >= 0");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ValidationError("modulus: power exponent must lie in (0, 1]");
  return Modulus{ModulusKind::power, K, alpha, cap};
}

inline Modulus infinite_modulus() { return Modulus{ModulusKind::infinite}; }

// Numerically evaluates inf over L > 1 + gate(2/L) of slope*L + penalty(2/L).
// The gate condition is monotone in L, so the admissible set is a half line;
// a log-spaced grid up to l_max brackets the minimum and golden-section
// search refines it. Returns +inf when slope is +inf. The result can only
// overshoot the true infimum, which keeps budgets built from it valid bounds.
double inf_over_L(double slope, const std::function<double(double)>& penalty,
                  const std::function<double(double)>& gate, double l_max = 1e6);

}  // namespace mfg

#endif  // MFG_MODULI_HPP
