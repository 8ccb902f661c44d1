#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace specga {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Pure function of its arguments; used to fan a master seed out into
// independent per-task / per-step streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  return mix64(mix64(mix64(mix64(master) ^ a) ^ b) ^ c);
}

// Domain separators for derive_seed.
namespace seed_tags {
inline constexpr std::uint64_t kNetInit = 0x5EED0001;
inline constexpr std::uint64_t kTrainElem = 0x5EED0002;
inline constexpr std::uint64_t kHeldout = 0x5EED0003;
inline constexpr std::uint64_t kTask = 0x5EED0004;
inline constexpr std::uint64_t kStrategy = 0x5EED0005;
inline constexpr std::uint64_t kOperator = 0x5EED0006;
}  // namespace seed_tags

// mt19937_64 with hand-pinned uniform/normal draws. The engine's output
// sequence is fixed by the standard; the standard library distributions are
// not, so the transforms live here and seeded runs replay everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Marsaglia polar method with one cached spare.
  double normal(double mean = 0.0, double sd = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + sd * spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return mean + sd * u * f;
  }

  // Unbiased draw from {0, ..., n-1}.
  std::size_t index(std::size_t n) {
    const std::uint64_t threshold = (-static_cast<std::uint64_t>(n)) % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x < threshold);
    return static_cast<std::size_t>(x % n);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace specga
