#pragma once

#include <cstdint>
#include <stdexcept>

#include "ctmcsens/streams/rng.hpp"

namespace ctmcsens {

/// Stream roles. A role separates the independent streams one path needs for
/// the same reaction channel.
namespace role {
inline constexpr std::uint32_t kShared = 0;     // CFD (k,1); NRM path; CRP tape
inline constexpr std::uint32_t kFirstOnly = 1;  // CFD (k,2); naive shared residual tape
inline constexpr std::uint32_t kSecondOnly = 2; // CFD (k,3)
inline constexpr std::uint32_t kIndependent = 3; // second, independent path of a CMC pair
inline constexpr std::uint32_t kSelection = 4;  // Gillespie reaction-selection uniforms
}  // namespace role

/// Derives one stream seed per (path, channel, role).
///
/// The triple is packed into 64 bits (path: 40 bits, channel: 16 bits,
/// role: 8 bits), run through the SplitMix64 finalizer, offset by the mixed
/// base seed and finalized again. Each step is a bijection for a fixed base,
/// so distinct triples give distinct seeds.
struct SeedPlan {
  std::uint64_t base_seed = 0;

  static constexpr std::uint64_t kMaxPath = (1ULL << 40) - 1;
  static constexpr std::uint64_t kMaxChannel = (1ULL << 16) - 1;
  static constexpr std::uint64_t kMaxRole = (1ULL << 8) - 1;

  std::uint64_t derive(std::uint64_t path, std::uint64_t channel, std::uint64_t role) const {
    if (path > kMaxPath || channel > kMaxChannel || role > kMaxRole)
      throw std::out_of_range("seed index out of range");
    std::uint64_t key = (path << 24) | (channel << 8) | role;
    return mix64(mix64(key) + mix64(base_seed ^ 0x6a09e667f3bcc909ULL));
  }
};

inline std::uint64_t derive_seed(const SeedPlan& plan, std::uint64_t path, std::uint64_t channel,
                                 std::uint64_t role) {
  return plan.derive(path, channel, role);
}

}  // namespace ctmcsens
