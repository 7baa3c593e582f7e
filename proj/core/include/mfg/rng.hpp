#ifndef MFG_RNG_HPP
#define MFG_RNG_HPP

#include <cstdint>

#include "mfg/spaces.hpp"

namespace mfg {

// Counter-based uniform generator. Every draw is a pure function of
// (master seed, replication, time step, player, purpose, counter), so a
// simulation produces identical numbers no matter how work is scheduled
// across threads. The mixer is the SplitMix64 finalizer applied to each key.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t master_seed) : seed_(master_seed) {}

  // Purpose tags keep draws for different decisions out of each other's streams.
  enum Purpose : std::uint64_t {
    kInitState = 1,
    kAction = 2,
    kNextState = 3,
    kGeneric = 4,
  };

  double uniform(std::uint64_t replication, std::uint64_t t, std::uint64_t player,
                 std::uint64_t purpose, std::uint64_t counter = 0) const {
    std::uint64_t h = mix(seed_ ^ 0x2545F4914F6CDD1Dull);
    h = mix(h ^ mix(replication + 0x9E3779B97F4A7C15ull));
    h = mix(h ^ mix(t + 0xC2B2AE3D27D4EB4Full));
    h = mix(h ^ mix(player + 0x165667B19E3779F9ull));
    h = mix(h ^ mix(purpose + 0x27D4EB2F165667C5ull));
    h = mix(h ^ mix(counter + 0x85EBCA77C2B2AE63ull));
    // 53-bit mantissa in [0, 1).
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }

  // Inverse-CDF draw from a probability vector; avoids stdlib distributions so
  // results match across platforms and standard library versions.
  int sample(const Dist& p, std::uint64_t replication, std::uint64_t t, std::uint64_t player,
             std::uint64_t purpose, std::uint64_t counter = 0) const {
    const double u = uniform(replication, t, player, purpose, counter);
    double acc = 0.0;
    const int n = p.size();
    for (int i = 0; i < n; ++i) {
      acc += p[i];
      if (u < acc) return i;
    }
    return n - 1;  // mass deficit from round-off lands on the last atom
  }

  std::uint64_t master_seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace mfg

#endif  // MFG_RNG_HPP
