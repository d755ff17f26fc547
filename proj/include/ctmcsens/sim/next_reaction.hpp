#pragma once

// Single-path simulators: the next reaction method over any unit-rate clock
// type, and Gillespie's direct method written as a time-changed holding
// process plus a uniform selection sequence.

#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "ctmcsens/model/network.hpp"
#include "ctmcsens/sim/path.hpp"
#include "ctmcsens/streams/clock.hpp"

namespace ctmcsens {

/// No-op path observer.
struct NullObserver {
  void on_jump(std::size_t /*k*/, const StateVec& /*x_before*/, double /*t*/) {}
  void on_grid(std::size_t /*j*/, const StateVec& /*x*/, double /*t*/) {}
};

namespace detail {

inline void check_event_cap(std::uint64_t n, const SimOptions& opts, double t) {
  if (n > opts.max_events) {
    std::ostringstream os;
    os << "event cap of " << opts.max_events << " exceeded at t=" << t;
    throw SimulationError(os.str());
  }
}

inline void init_record(PathRecord& rec, const StateVec& x0, const SimOptions& opts,
                        std::size_t channels) {
  if (opts.horizon < 0.0) throw SimulationError("horizon must be >= 0");
  rec.initial = x0;
  rec.horizon = opts.horizon;
  rec.firings.assign(channels, 0);
  rec.grid_states.reserve(opts.grid.size());
}

inline void record_jump(PathRecord& rec, const SimOptions& opts, double t, const StateVec& x) {
  if (opts.record_trace && (rec.n_updates % std::max<std::size_t>(opts.trace_every, 1)) == 0) {
    rec.jump_times.push_back(t);
    rec.jump_states.push_back(x);
  }
}

}  // namespace detail

/// Next reaction method driven by one clock per channel (ClockStream for an
/// independent path, TapeCursor for a path sharing its processes).
template <class Clock, class Observer = NullObserver>
PathRecord run_next_reaction(const RateTable& rates, const StateVec& x0, std::span<Clock> clocks,
                             const SimOptions& opts, Observer&& obs = Observer{}) {
  const std::size_t m = rates.size();
  PathRecord rec;
  detail::init_record(rec, x0, opts, m);
  StateVec x = x0;
  std::vector<double> a(m);
  detail::GridCursor grid(opts.grid);
  auto emit = [&](std::size_t j) {
    rec.grid_states.push_back(x);
    obs.on_grid(j, x, opts.grid[j]);
  };
  double t = 0.0;
  rates.eval_all(x, a);
  while (true) {
    double delta = kInfinity;
    std::size_t mu = 0;
    for (std::size_t k = 0; k < m; ++k) {
      double dt = clocks[k].candidate(a[k]);
      if (dt < delta) {
        delta = dt;
        mu = k;
      }
    }
    double t_next = t + delta;
    if (!(t_next <= opts.horizon)) break;
    grid.before(t_next, emit);
    for (std::size_t k = 0; k < m; ++k)
      if (k != mu && a[k] > 0.0) clocks[k].advance(a[k], delta);
    clocks[mu].fire();
    obs.on_jump(mu, x, t_next);
    rates.apply(mu, x);
    t = t_next;
    ++rec.firings[mu];
    ++rec.n_updates;
    detail::record_jump(rec, opts, t, x);
    detail::check_event_cap(rec.n_updates, opts, t);
    rates.eval_all(x, a);
  }
  grid.rest(emit);
  rec.terminal = x;
  return rec;
}

/// Exact single path by the next reaction method; one ClockStream per
/// channel seeded from (path, channel, stream_role).
template <class Observer = NullObserver>
PathRecord simulate_nrm(const ReactionNetwork& net, const ParamMap& params, const StateVec& x0,
                        const SimOptions& opts, const PathSeeds& seeds,
                        std::uint32_t stream_role = role::kShared, Observer&& obs = Observer{}) {
  RateTable rates(net, params);
  std::vector<ClockStream> clocks;
  clocks.reserve(rates.size());
  for (std::size_t k = 0; k < rates.size(); ++k) clocks.emplace_back(seeds(k, stream_role));
  return run_next_reaction(rates, x0, std::span<ClockStream>(clocks), opts,
                           std::forward<Observer>(obs));
}

/// Gillespie's direct method. Jump times come from the unit-rate process
/// `holding` run at total rate lambda_0; the n-th jump selects reaction k
/// iff xi_n is in (q_{k-1}, q_k].
inline PathRecord run_gillespie(const RateTable& rates, const StateVec& x0, ArrivalTape& holding,
                                UniformTape& xi, const SimOptions& opts) {
  const std::size_t m = rates.size();
  PathRecord rec;
  detail::init_record(rec, x0, opts, m);
  StateVec x = x0;
  std::vector<double> a(m);
  detail::GridCursor grid(opts.grid);
  auto emit = [&](std::size_t) { rec.grid_states.push_back(x); };
  TapeCursor clock(holding);
  double t = 0.0;
  std::size_t jumps = 0;
  while (true) {
    rates.eval_all(x, a);
    double total = 0.0;
    for (double v : a) total += v;
    double delta = clock.candidate(total);
    double t_next = t + delta;
    if (!(t_next <= opts.horizon)) break;
    grid.before(t_next, emit);
    clock.fire();
    double u = xi.at(jumps) * total;
    std::size_t mu = m;
    double cumulative = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      cumulative += a[k];
      if (a[k] > 0.0 && u <= cumulative) {
        mu = k;
        break;
      }
    }
    if (mu == m) {
      // u landed above the rounded cumulative sum: take the last live channel.
      for (std::size_t k = m; k-- > 0;)
        if (a[k] > 0.0) {
          mu = k;
          break;
        }
    }
    rates.apply(mu, x);
    t = t_next;
    ++jumps;
    ++rec.firings[mu];
    ++rec.n_updates;
    detail::record_jump(rec, opts, t, x);
    detail::check_event_cap(rec.n_updates, opts, t);
  }
  grid.rest(emit);
  rec.terminal = x;
  return rec;
}

inline PathRecord simulate_gillespie(const ReactionNetwork& net, const ParamMap& params,
                                     const StateVec& x0, const SimOptions& opts,
                                     ArrivalTape& holding, UniformTape& xi) {
  RateTable rates(net, params);
  return run_gillespie(rates, x0, holding, xi, opts);
}

}  // namespace ctmcsens
