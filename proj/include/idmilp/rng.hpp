#pragma once

#include <cstdint>
#include <random>

namespace idmilp {

/// mt19937_64 with hand-written transforms so that draws are identical on
/// every standard library (std::*_distribution are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  int index(int n);
  /// Box-Muller; the second variate is cached.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Normal(mean, sd) conditioned on [lo, hi]. Rejection sampling first, then
/// inverse-CDF bisection when the window carries little mass. sd == 0 or a
/// degenerate window returns the mean clamped to the window.
double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi);

}  // namespace idmilp
