#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "ctmcsens/estimators/stats.hpp"
#include "ctmcsens/streams/clock.hpp"
#include "ctmcsens/streams/rng.hpp"
#include "ctmcsens/streams/seed_plan.hpp"

using namespace ctmcsens;

namespace {

/// Two-sided Kolmogorov-Smirnov statistic of a sample against Exp(1).
double ks_exponential(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double cdf = 1.0 - std::exp(-sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

/// Critical value of the KS statistic at level alpha (asymptotic).
double ks_critical(double alpha, std::size_t n) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

/// Jumps of a ClockStream driven at a constant rate over [0, t].
std::uint64_t count_jumps(ClockStream& c, double rate, double t) {
  double now = 0.0;
  std::uint64_t n = 0;
  while (true) {
    double dt = c.candidate(rate);
    if (now + dt > t) {
      c.advance(rate, t - now);
      return n;
    }
    c.advance(rate, dt);
    c.fire();
    now += dt;
    ++n;
  }
}

}  // namespace

TEST(Rng, SplitMix64ReferenceOutput) {
  SplitMix64 g(0);
  EXPECT_EQ(g(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(g(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(kStreamFormatVersion, 1);
}

TEST(Rng, UniformIsInHalfOpenUnitInterval) {
  SplitMix64 g(11);
  for (int i = 0; i < 100000; ++i) {
    double u = g.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
  }
}

TEST(Clock, NextJumpCandidate) {
  EXPECT_DOUBLE_EQ(next_jump_candidate(0.5, 2.0), 0.25);
  EXPECT_EQ(next_jump_candidate(0.5, 0.0), kInfinity);
  EXPECT_EQ(next_jump_candidate(0.0, 3.0), 0.0);
  ClockStream c = ClockStream::with_next(0.5);
  EXPECT_DOUBLE_EQ(c.candidate(2.0), 0.25);
  EXPECT_EQ(c.consumed(), 0.0);
}

TEST(Clock, AdvanceAddsInternalTime) {
  ClockStream c = ClockStream::with_next(1.0);
  c.advance(3.0, 0.1);
  EXPECT_NEAR(c.consumed(), 0.3, 1e-15);
  EXPECT_EQ(c.next(), 1.0);
  EXPECT_EQ(c.jumps(), 0u);
}

TEST(Clock, FireDrawsLogOneOverU) {
  const std::uint64_t seed = 99;
  ClockStream c(seed);
  SplitMix64 mirror(seed);
  double first = std::log(1.0 / mirror.uniform());
  EXPECT_DOUBLE_EQ(c.next(), first);
  c.advance(1.0, c.residual());
  double u = mirror.uniform();
  double before = c.next();
  c.fire();
  EXPECT_EQ(c.consumed(), before);
  EXPECT_DOUBLE_EQ(c.next() - before, std::log(1.0 / u));
}

TEST(Clock, OvershootIsALogicError) {
  ClockStream c = ClockStream::with_next(1.0);
  EXPECT_THROW(c.advance(2.0, 1.0), std::logic_error);
}

TEST(Clock, AdvanceOnlyProducesNoJumps) {
  const std::uint64_t seed = 5;
  ArrivalTape tape(seed);
  ClockStream c(seed);
  double u = 0.5 * tape.arrival(0);
  c.advance(1.0, u);
  EXPECT_EQ(c.jumps(), 0u);
  std::size_t on_tape = 0;
  while (tape.arrival(on_tape) <= u) ++on_tape;
  EXPECT_EQ(on_tape, 0u);
}

TEST(Clock, ClockStreamAndTapeAgreeOnTheSameSeed) {
  for (std::uint64_t seed : {1ULL, 2ULL, 12345ULL}) {
    ClockStream c(seed);
    ArrivalTape tape(seed);
    for (std::size_t i = 0; i < 1000; ++i) {
      ASSERT_EQ(c.next(), tape.arrival(i));
      c.advance(1.0, c.residual());
      c.fire();
    }
    // Jump counts up to an arbitrary internal time agree as well.
    ClockStream d(seed);
    double u = 137.25;
    std::uint64_t jumps = count_jumps(d, 1.0, u);
    std::uint64_t on_tape = 0;
    while (tape.arrival(on_tape) <= u) ++on_tape;
    EXPECT_EQ(jumps, on_tape);
  }
}

TEST(Clock, TapeArrivalsIncreaseAndAreMemoized) {
  ArrivalTape tape(8);
  double prev = 0.0;
  for (std::size_t i = 0; i < 5000; ++i) {
    double a = tape.arrival(i);
    ASSERT_GT(a, prev);
    prev = a;
  }
  EXPECT_EQ(tape.arrival(17), tape.arrival(17));
}

TEST(Clock, InterleavedTapeConsumersAgreeWithSingleReader) {
  const std::uint64_t seed = 77;
  ArrivalTape reference(seed);
  std::vector<double> expected;
  for (std::size_t i = 0; i < 3000; ++i) expected.push_back(reference.arrival(i));

  ArrivalTape shared(seed);
  TapeCursor fast(shared), slow(shared);
  SplitMix64 pattern(3);
  std::size_t fast_i = 0, slow_i = 0;
  while (fast_i < 2999 || slow_i < 2999) {
    bool use_fast = (pattern() & 3) != 0;
    TapeCursor& c = use_fast && fast_i < 2999 ? fast : slow;
    std::size_t& i = &c == &fast ? fast_i : slow_i;
    if (i >= 2999) continue;
    ASSERT_EQ(c.next(), expected[i]);
    c.advance(1.0, c.residual());
    c.fire();
    ++i;
    ASSERT_EQ(c.next(), expected[i]);
  }
  for (std::size_t i = 0; i < 3000; ++i) ASSERT_EQ(shared.arrival(i), expected[i]);
}

TEST(Clock, GapsAreExponentialKS) {
  const std::size_t n = 100000;
  const double crit = ks_critical(0.001, n);
  ClockStream c(2024);
  std::vector<double> gaps;
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gaps.push_back(c.next() - prev);
    prev = c.next();
    c.advance(1.0, c.residual());
    c.fire();
  }
  EXPECT_LT(ks_exponential(gaps), crit);

  ArrivalTape tape(2025);
  std::vector<double> tape_gaps;
  prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tape_gaps.push_back(tape.arrival(i) - prev);
    prev = tape.arrival(i);
  }
  EXPECT_LT(ks_exponential(tape_gaps), crit);
}

TEST(Clock, KSDetectsAWrongRate) {
  ClockStream c(2024);
  std::vector<double> gaps;
  double prev = 0.0;
  for (int i = 0; i < 100000; ++i) {
    gaps.push_back(1.05 * (c.next() - prev));
    prev = c.next();
    c.advance(1.0, c.residual());
    c.fire();
  }
  EXPECT_GT(ks_exponential(gaps), ks_critical(0.001, gaps.size()));
}

TEST(Clock, ConstantRateCountsArePoisson) {
  const double rate = 2.5, t = 3.0, lambda = rate * t;
  const int reps = 10000;
  SeedPlan plan{404};
  RunningStats s;
  for (int r = 0; r < reps; ++r) {
    ClockStream c(plan.derive(static_cast<std::uint64_t>(r), 0, 0));
    s.push(static_cast<double>(count_jumps(c, rate, t)));
  }
  double se_mean = std::sqrt(lambda / reps);
  double se_var = std::sqrt((lambda + 2 * lambda * lambda) / reps);
  EXPECT_NEAR(s.mean(), lambda, 4 * se_mean);
  EXPECT_NEAR(s.variance(), lambda, 4 * se_var);
}

TEST(Clock, UniformTapeIsMemoized) {
  UniformTape a(5), b(5);
  double x = a.at(10);
  EXPECT_EQ(a.at(3), b.at(3));
  EXPECT_EQ(a.at(10), x);
  EXPECT_EQ(b.at(10), x);
}

TEST(Seeds, DeterministicAndDistinct) {
  SeedPlan plan{7};
  EXPECT_EQ(derive_seed(plan, 0, 0, 0), derive_seed(plan, 0, 0, 0));
  EXPECT_NE(derive_seed(plan, 0, 0, 0), derive_seed(plan, 1, 0, 0));
  EXPECT_NE(derive_seed(plan, 0, 0, 0), derive_seed(SeedPlan{8}, 0, 0, 0));
}

TEST(Seeds, NoCollisionsOnTheUsedGrid) {
  SeedPlan plan{7};
  std::set<std::uint64_t> seen;
  std::size_t total = 0;
  for (std::uint64_t path = 0; path < 100; ++path)
    for (std::uint64_t channel = 0; channel < 4; ++channel)
      for (std::uint64_t r : {role::kShared, role::kFirstOnly, role::kSecondOnly,
                              role::kIndependent, role::kSelection}) {
        seen.insert(plan.derive(path, channel, r));
        ++total;
      }
  EXPECT_EQ(seen.size(), total);
}

TEST(Seeds, OutOfRangeIndicesAreRejected) {
  SeedPlan plan{1};
  EXPECT_THROW(plan.derive(SeedPlan::kMaxPath + 1, 0, 0), std::out_of_range);
  EXPECT_THROW(plan.derive(0, SeedPlan::kMaxChannel + 1, 0), std::out_of_range);
  EXPECT_THROW(plan.derive(0, 0, SeedPlan::kMaxRole + 1), std::out_of_range);
}

TEST(Stats, RunningStatsMatchesTwoPassAndMergesInOrder) {
  SplitMix64 g(1);
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back(g.uniform() * 10 - 3);
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  RunningStats all, left, right;
  for (std::size_t i = 0; i < v.size(); ++i) {
    all.push(v[i]);
    (i < 400 ? left : right).push(v[i]);
  }
  left.merge(right);
  EXPECT_NEAR(all.mean(), mean, 1e-12);
  EXPECT_NEAR(all.variance(), ss / 999.0, 1e-10);
  EXPECT_NEAR(left.mean(), mean, 1e-12);
  EXPECT_NEAR(left.variance(), ss / 999.0, 1e-10);
  EXPECT_EQ(left.count(), 1000u);
  RunningStats one;
  one.push(4.0);
  EXPECT_EQ(one.variance(), 0.0);
}
