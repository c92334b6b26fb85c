#include "idmilp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace idmilp {

int Rng::index(int n) {
  if (n <= 0) throw std::invalid_argument("Rng::index needs a positive bound");
  return std::min(n - 1, static_cast<int>(uniform() * n));
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("truncated_normal: empty window");
  if (!(sd > 0.0) || lo == hi) return std::clamp(mean, lo, hi);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double x = rng.normal(mean, sd);
    if (x >= lo && x <= hi) return x;
  }
  const double a = normal_cdf((lo - mean) / sd);
  const double b = normal_cdf((hi - mean) / sd);
  const double target = a + (b - a) * rng.uniform();
  double left = lo, right = hi;
  for (int iter = 0; iter < 200 && right - left > 1e-12 * std::max(1.0, std::abs(right)); ++iter) {
    const double mid = 0.5 * (left + right);
    if (normal_cdf((mid - mean) / sd) < target) left = mid;
    else right = mid;
  }
  return 0.5 * (left + right);
}

}  // namespace idmilp
