#pragma once

#include <cstdint>
#include <vector>

namespace ctmcsens {

/// Molecule count of one species.
using Count = std::int64_t;

/// Species counts, one entry per species in network order.
using StateVec = std::vector<Count>;

/// A point of a trajectory.
struct State {
  StateVec x;
  double t = 0.0;
};

}  // namespace ctmcsens
