#ifndef MFG_ERROR_HPP
#define MFG_ERROR_HPP

#include <stdexcept>

namespace mfg {

// Bad input: malformed config or a violated declared invariant. CLI maps this to exit 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Instance too large for the exact dense algorithms. CLI maps this to exit 3.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computed quantity broke a guarantee the operators promise (e.g. a regret went
// negative beyond round-off). Signals an evaluator or assumption bug. CLI exit 1.
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mfg

#endif  // MFG_ERROR_HPP
