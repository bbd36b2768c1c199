#include "epipolar/random.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

namespace epipolar {

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

double Rng::Normal(double mean, double sigma) {
  // u1 in (0, 1] keeps the logarithm finite.
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + sigma * radius * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::Index(std::uint64_t n) {
  // Reject the tail so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
  std::uint64_t x = engine_();
  while (x > limit) x = engine_();
  return x % n;
}

std::vector<std::size_t> Rng::SampleDistinct(std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k && i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(Index(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(std::min(k, n));
  return pool;
}

}  // namespace epipolar
