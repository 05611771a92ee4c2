#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>

namespace nssi {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable seed derivation: derive_seed(master, a, b, ...) is a fixed function of
// its arguments, so a work unit's stream never depends on scheduling order.
template <typename... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t master, Parts... parts) noexcept {
  std::uint64_t h = splitmix64(master);
  ((h = splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(parts) + 0x632be59bd9b4e019ULL))), ...);
  return h;
}

// 64-bit FNV-1a, used for fingerprints and id-derived seeds.
inline constexpr std::uint64_t fnv1a64(std::string_view s,
                                       std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// The engine's output sequence is fixed by the standard; the helpers below are
// hand-written so that samples are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Poisson(mean) by inversion; normal approximation for very large means
  // where exp(-mean) underflows.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: negative mean");
    if (mean == 0.0) return 0;
    if (mean > 500.0) {
      const double u1 = 1.0 - uniform01();
      const double u2 = uniform01();
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
      const double x = std::round(mean + std::sqrt(mean) * z);
      return x < 0.0 ? 0 : static_cast<std::uint64_t>(x);
    }
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform01();
    std::uint64_t k = 0;
    while (u >= cdf && k < 100000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p == 0.0 && cdf < u) break;
    }
    return k;
  }

  // Index drawn from an inclusive prefix-sum table (last entry = total mass).
  std::size_t categorical(std::span<const double> cumulative) {
    const double u = uniform01() * cumulative.back();
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (u < cumulative[mid])
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nssi
