#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace arpatch {

// Deterministic randomness for the whole pipeline.
//
// std::mt19937_64 is fully specified by the standard, but the std
// distributions are not, so every draw here goes through the hand-rolled
// primitives below. The exact procedures are part of the public contract:
// independent reimplementations fed the same seed must reproduce the same
// streams.
//
//   canonical_double : (next() >> 11) * 2^-53, uniform in [0, 1)
//   bounded_uint(b)  : rejection sampling on next() % b (reject draws >=
//                      2^64 - 2^64 % b), uniform in [0, b)
//   gaussian         : Box-Muller on two canonical draws, first draw nudged
//                      away from zero; returns sqrt(-2 ln u1) * cos(2 pi u2)
//   shuffle          : Fisher-Yates from the back, swap(i, bounded_uint(i+1))

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double canonical_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  std::uint64_t bounded_uint(std::uint64_t bound) {
    // bound == 0 is a caller bug; treat as identity-safe 0.
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  double gaussian() {
    double u1 = canonical_double();
    double u2 = canonical_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded_uint(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-image seed: mixes the global seed with the image id so batch results
// do not depend on scheduling order.
inline std::uint64_t seed_for_image(std::uint64_t global_seed, std::string_view image_id) {
  return splitmix64(global_seed ^ fnv1a64(image_id));
}

// Per-model seed: one encoder per resize-plan entry.
inline std::uint64_t seed_for_model(std::uint64_t global_seed, std::uint64_t entry_index) {
  return splitmix64(splitmix64(global_seed) ^ (entry_index + 1));
}

}  // namespace arpatch
