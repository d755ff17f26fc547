#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctmcsens/model/state.hpp"
#include "ctmcsens/streams/seed_plan.hpp"

namespace ctmcsens {

struct SimOptions {
  double horizon = 0.0;
  /// Observation times, nondecreasing and within [0, horizon]. The state
  /// recorded at g is the state after every jump at a time <= g.
  std::vector<double> grid;
  bool record_trace = false;
  /// With record_trace, keep every n-th jump.
  std::size_t trace_every = 1;
  std::uint64_t max_events = 100'000'000;
};

struct PathRecord {
  StateVec initial;
  StateVec terminal;
  double horizon = 0.0;
  std::vector<double> jump_times;
  std::vector<StateVec> jump_states;
  std::vector<StateVec> grid_states;
  std::uint64_t n_updates = 0;
  std::vector<std::uint64_t> firings;

  friend bool operator==(const PathRecord&, const PathRecord&) = default;
};

enum class Coupling { kIndependent, kCFD, kCRP, kCRN, kNaive };

inline std::string to_string(Coupling c) {
  switch (c) {
    case Coupling::kIndependent: return "independent";
    case Coupling::kCFD: return "cfd";
    case Coupling::kCRP: return "crp";
    case Coupling::kCRN: return "crn";
    case Coupling::kNaive: return "naive";
  }
  return "?";
}

/// Two paths on one time axis: `first` runs at the perturbed parameter set,
/// `second` at the nominal one.
struct CoupledPath {
  Coupling kind = Coupling::kCFD;
  PathRecord first;
  PathRecord second;
  /// Work: jumps of the joint process (CFD, naive) or of both paths together.
  std::uint64_t n_updates = 0;
  /// CFD and naive: firings of the (k,1), (k,2), (k,3) sub-channels.
  std::vector<std::array<std::uint64_t, 3>> split_firings;
  /// CFD and naive: false if any step had both residual rates positive.
  bool split_invariant_held = true;

  friend bool operator==(const CoupledPath&, const CoupledPath&) = default;
};

/// Seeds of all streams belonging to one sample path.
struct PathSeeds {
  SeedPlan plan;
  std::uint64_t path = 0;

  std::uint64_t operator()(std::uint64_t channel, std::uint64_t role) const {
    return plan.derive(path, channel, role);
  }
};

namespace detail {

/// Emits grid observations as a path crosses grid times.
class GridCursor {
 public:
  explicit GridCursor(const std::vector<double>& grid) : grid_(&grid) {}

  /// Records x for every pending grid time strictly before t.
  template <class Fn>
  void before(double t, Fn&& record) {
    while (next_ < grid_->size() && (*grid_)[next_] < t) record(next_++);
  }
  template <class Fn>
  void rest(Fn&& record) {
    while (next_ < grid_->size()) record(next_++);
  }

 private:
  const std::vector<double>* grid_;
  std::size_t next_ = 0;
};

}  // namespace detail

}  // namespace ctmcsens
