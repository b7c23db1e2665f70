#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace topt {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Stable sub-stream derivation: the same (base, tag, index) always
/// yields the same seed, so every pipeline stage draws from its own
/// named stream of the run's root seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t s = base ^ h ^ (index * 0x9e3779b97f4a7c15ull + (index << 1));
  return splitmix64(s);
}

/// Deterministic RNG: mt19937_64 (fully specified by the standard) with
/// explicit bit-to-float mappings, so sequences are reproducible across
/// platforms. std::uniform_real_distribution is implementation-defined
/// and deliberately avoided.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  double uniform01() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Uniform on the dyadic grid of spacing (hi-lo)/2^grid_bits.
  /// grid_bits <= 0 falls back to the full-resolution uniform.
  double uniform_grid(double lo, double hi, int grid_bits) {
    if (grid_bits <= 0) return uniform(lo, hi);
    const double scale = static_cast<double>(1ull << grid_bits);
    const double q = std::round(uniform01() * scale) / scale;
    return lo + q * (hi - lo);
  }

  std::uint64_t below(std::uint64_t bound) {  // [0, bound)
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * bound) >> 64);
  }

  double normal(double sigma) {  // Box-Muller, one value per pair of draws
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace topt
