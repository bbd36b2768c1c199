#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace epipolar {

// Portable seeded generator. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the real-valued transforms are
// implemented here rather than taken from <random> distributions, whose
// algorithms are implementation-defined.
class Rng {
 public:
  static constexpr std::string_view kName =
      "mt19937_64; uniform=(u64>>11)*2^-53; normal=Box-Muller(cos branch); "
      "index=rejection";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  // Uniform in [lo, hi).
  double Uniform(double lo, double hi);
  double Normal(double mean, double sigma);
  // Uniform integer in [0, n). Requires n > 0.
  std::uint64_t Index(std::uint64_t n);
  // k distinct indices from [0, n) in sampling order (partial Fisher-Yates).
  std::vector<std::size_t> SampleDistinct(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace epipolar
