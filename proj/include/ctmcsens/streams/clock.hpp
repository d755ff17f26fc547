#pragma once

// Unit-rate Poisson processes consumed in internal time.
//
// ClockStream keeps only the next jump (P) and the consumed internal time
// (T), the bookkeeping of the next reaction method. ArrivalTape memoizes the
// arrival sequence so that several consumers can read the same process at
// different internal times; TapeCursor is one such consumer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "ctmcsens/streams/rng.hpp"

namespace ctmcsens {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Real-time delay until a clock with `residual` internal time left fires
/// when driven at `rate`; infinite when the rate is zero.
inline double next_jump_candidate(double residual, double rate) {
  return rate > 0.0 ? residual / rate : kInfinity;
}

namespace detail {
// Relative slack tolerated when T overshoots P through rounding of rate * dt.
inline constexpr double kOvershootTolerance = 1e-9;

inline void check_overshoot(double consumed, double next) {
  if (consumed > next) {
    double scale = std::max(1.0, std::abs(next));
    if (consumed - next > kOvershootTolerance * scale)
      throw std::logic_error("clock advanced past its next jump");
  }
}
}  // namespace detail

class ClockStream {
 public:
  explicit ClockStream(std::uint64_t seed) : rng_(seed) { next_ = rng_.exponential(); }

  /// Test hook: a clock whose first jump sits at internal time `next`.
  static ClockStream with_next(double next, std::uint64_t seed = 0) {
    ClockStream c(seed);
    c.next_ = next;
    return c;
  }

  double next() const { return next_; }          // P
  double consumed() const { return consumed_; }  // T
  double residual() const { return next_ - consumed_; }

  double candidate(double rate) const { return next_jump_candidate(residual(), rate); }

  /// T += rate * dt; must not pass P.
  void advance(double rate, double dt) {
    consumed_ += rate * dt;
    detail::check_overshoot(consumed_, next_);
    if (consumed_ > next_) consumed_ = next_;
  }

  /// Jump: T = P, P += Exp(1).
  void fire() {
    consumed_ = next_;
    next_ += rng_.exponential();
    ++jumps_;
  }

  std::uint64_t jumps() const { return jumps_; }

 private:
  SplitMix64 rng_;
  double next_ = 0.0;
  double consumed_ = 0.0;
  std::uint64_t jumps_ = 0;
};

/// Lazily extended, memoized arrival times of one unit-rate Poisson process.
/// arrival(i) is the (i+1)-th jump; gaps are Exp(1) draws in order.
class ArrivalTape {
 public:
  explicit ArrivalTape(std::uint64_t seed) : rng_(seed) {}

  double arrival(std::size_t i) {
    while (arrivals_.size() <= i) {
      double last = arrivals_.empty() ? 0.0 : arrivals_.back();
      arrivals_.push_back(last + rng_.exponential());
    }
    return arrivals_[i];
  }

  std::size_t materialized() const { return arrivals_.size(); }

 private:
  SplitMix64 rng_;
  std::vector<double> arrivals_;
};

/// One consumer of an ArrivalTape; same interface as ClockStream.
class TapeCursor {
 public:
  explicit TapeCursor(ArrivalTape& tape) : tape_(&tape) { next_ = tape_->arrival(0); }

  double next() const { return next_; }
  double consumed() const { return consumed_; }
  double residual() const { return next_ - consumed_; }
  double candidate(double rate) const { return next_jump_candidate(residual(), rate); }

  void advance(double rate, double dt) {
    consumed_ += rate * dt;
    detail::check_overshoot(consumed_, next_);
    if (consumed_ > next_) consumed_ = next_;
  }

  void fire() {
    consumed_ = next_;
    ++index_;
    next_ = tape_->arrival(index_);
  }

  std::uint64_t jumps() const { return index_; }

 private:
  ArrivalTape* tape_;
  std::size_t index_ = 0;
  double next_ = 0.0;
  double consumed_ = 0.0;
};

/// Memoized i.i.d. uniform(0,1] sequence (Gillespie reaction selection).
class UniformTape {
 public:
  explicit UniformTape(std::uint64_t seed) : rng_(seed) {}

  double at(std::size_t i) {
    while (values_.size() <= i) values_.push_back(rng_.uniform());
    return values_[i];
  }

 private:
  SplitMix64 rng_;
  std::vector<double> values_;
};

}  // namespace ctmcsens
