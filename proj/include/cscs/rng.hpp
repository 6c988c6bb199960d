#pragma once

// Seeded randomness with a fully specified stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Everything layered on top is defined here rather than taken from
// <random> distributions (which are implementation-defined):
//   uniform()  : top 53 bits of one draw, scaled to [0, 1)
//   below(m)   : rejection sampling on the top bits, unbiased in [0, m)
//   normal()   : Marsaglia polar method, caching the second variate
//   shuffle()  : Fisher-Yates from the last position down, j = below(i + 1)

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>

namespace cscs {

/// SplitMix64 finalizer; derives independent seeds for replications.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    int bits = 0;
    while ((std::uint64_t{1} << bits) < bound && bits < 63) ++bits;
    if ((std::uint64_t{1} << bits) < bound) bits = 64;
    for (;;) {
      const std::uint64_t draw = bits == 64 ? next() : next() >> (64 - bits);
      if (draw < bound) return draw;
    }
  }

  bool coin() { return (next() >> 63) != 0; }

  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    return u * f;
  }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace cscs
