#pragma once

// Random number generation with a frozen, platform-independent output
// sequence. Version 1 of the stream format:
//
//   engine   SplitMix64 (Steele, Lea & Flood 2014): state += 0x9e3779b97f4a7c15,
//            output = mix64(state)
//   uniform  u = ((next() >> 11) + 1) * 2^-53, so u is in (0, 1]
//   Exp(1)   ln(1/u)
//
// Changing any of these is a breaking change to every recorded seed.

#include <cmath>
#include <cstdint>
#include <limits>

namespace ctmcsens {

inline constexpr int kStreamFormatVersion = 1;

/// Stafford variant 13 finalizer used by SplitMix64; a bijection on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64; satisfies std::uniform_random_bit_generator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform on (0, 1] with 53 bits of resolution.
  constexpr double uniform() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  /// Exp(1) draw as ln(1/u).
  double exponential() { return std::log(1.0 / uniform()); }

 private:
  std::uint64_t state_;
};

}  // namespace ctmcsens
