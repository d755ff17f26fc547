#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ctmcsens/sim/path.hpp"
#include "ctmcsens/streams/clock.hpp"

namespace ctmcsens {

/// Z1(t) = Y1(b t) + Y2((a - b) t), Z2(t) = Y1(b t) for constant rates a >= b.
struct ToyCouplingPath {
  /// Jump times of Z1 - Z2 = Y2((a - b) t) up to the horizon.
  std::vector<double> difference_jumps;
  std::uint64_t shared_jumps = 0;

  std::uint64_t difference() const { return difference_jumps.size(); }
  std::uint64_t first_total() const { return shared_jumps + difference(); }
  std::uint64_t second_total() const { return shared_jumps; }
};

inline ToyCouplingPath toy_poisson_coupling(double rate_a, double rate_b, double horizon,
                                            const PathSeeds& seeds) {
  if (!(rate_a >= rate_b && rate_b >= 0.0))
    throw std::invalid_argument("toy coupling needs rate_a >= rate_b >= 0");
  ToyCouplingPath out;
  ClockStream shared(seeds(0, role::kShared));
  while (shared.next() <= rate_b * horizon) {
    shared.fire();
    ++out.shared_jumps;
  }
  double extra = rate_a - rate_b;
  if (extra > 0.0) {
    ClockStream aux(seeds(0, role::kFirstOnly));
    while (aux.next() <= extra * horizon) {
      out.difference_jumps.push_back(aux.next() / extra);
      aux.fire();
    }
  }
  return out;
}

}  // namespace ctmcsens
