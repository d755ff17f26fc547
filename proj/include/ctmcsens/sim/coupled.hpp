#pragma once

// Coupled pairs (X1, X2) where X1 runs at the perturbed parameters and X2 at
// the nominal ones.
//
//   CFD          each channel k is split into a shared stream driven at
//                min(l1, l2) and two residual streams at l1 - min and
//                l2 - min, each with its own unit-rate process.
//   naive        as CFD, but both residual terms read one shared process;
//                the marginals are wrong, kept to demonstrate the failure.
//   CRP          both paths read the same per-channel process Y_k, each at
//                its own integrated intensity.
//   CRN          Gillespie paths sharing the holding-time process and the
//                selection uniforms, each indexed by its own jump count.
//   independent  two unrelated next-reaction paths (crude Monte Carlo).

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "ctmcsens/model/network.hpp"
#include "ctmcsens/sim/next_reaction.hpp"
#include "ctmcsens/sim/path.hpp"
#include "ctmcsens/streams/clock.hpp"

namespace ctmcsens {

namespace detail {

/// Next reaction method on the split representation. Sub-channel order for
/// ties is lexicographic in (k, i).
template <class SharedClock, class FirstClock, class SecondClock>
CoupledPath run_split_coupling(const RateTable& first_rates, const RateTable& second_rates,
                               const StateVec& x0_first, const StateVec& x0_second,
                               std::span<SharedClock> shared, std::span<FirstClock> first_only,
                               std::span<SecondClock> second_only, const SimOptions& opts,
                               Coupling kind) {
  const std::size_t m = first_rates.size();
  CoupledPath out;
  out.kind = kind;
  out.split_firings.assign(m, {0, 0, 0});
  init_record(out.first, x0_first, opts, m);
  init_record(out.second, x0_second, opts, m);
  StateVec& x1 = out.first.terminal;
  StateVec& x2 = out.second.terminal;
  x1 = x0_first;
  x2 = x0_second;
  std::vector<std::array<double, 3>> sub(m);
  GridCursor grid(opts.grid);
  auto emit = [&](std::size_t) {
    out.first.grid_states.push_back(x1);
    out.second.grid_states.push_back(x2);
  };
  auto refresh = [&] {
    for (std::size_t k = 0; k < m; ++k) {
      double l1 = first_rates(k, x1);
      double l2 = second_rates(k, x2);
      double common = std::min(l1, l2);
      sub[k] = {common, l1 - common, l2 - common};
      if (sub[k][1] > 0.0 && sub[k][2] > 0.0) out.split_invariant_held = false;
    }
  };
  double t = 0.0;
  refresh();
  while (true) {
    double delta = kInfinity;
    std::size_t mu_k = 0;
    int mu_i = 0;
    for (std::size_t k = 0; k < m; ++k) {
      double c0 = shared[k].candidate(sub[k][0]);
      double c1 = first_only[k].candidate(sub[k][1]);
      double c2 = second_only[k].candidate(sub[k][2]);
      if (c0 < delta) { delta = c0; mu_k = k; mu_i = 0; }
      if (c1 < delta) { delta = c1; mu_k = k; mu_i = 1; }
      if (c2 < delta) { delta = c2; mu_k = k; mu_i = 2; }
    }
    double t_next = t + delta;
    if (!(t_next <= opts.horizon)) break;
    grid.before(t_next, emit);
    for (std::size_t k = 0; k < m; ++k) {
      if (sub[k][0] > 0.0 && !(k == mu_k && mu_i == 0)) shared[k].advance(sub[k][0], delta);
      if (sub[k][1] > 0.0 && !(k == mu_k && mu_i == 1)) first_only[k].advance(sub[k][1], delta);
      if (sub[k][2] > 0.0 && !(k == mu_k && mu_i == 2)) second_only[k].advance(sub[k][2], delta);
    }
    switch (mu_i) {
      case 0:
        shared[mu_k].fire();
        first_rates.apply(mu_k, x1);
        second_rates.apply(mu_k, x2);
        ++out.first.firings[mu_k];
        ++out.second.firings[mu_k];
        ++out.first.n_updates;
        ++out.second.n_updates;
        break;
      case 1:
        first_only[mu_k].fire();
        first_rates.apply(mu_k, x1);
        ++out.first.firings[mu_k];
        ++out.first.n_updates;
        break;
      default:
        second_only[mu_k].fire();
        second_rates.apply(mu_k, x2);
        ++out.second.firings[mu_k];
        ++out.second.n_updates;
        break;
    }
    ++out.split_firings[mu_k][mu_i];
    ++out.n_updates;
    t = t_next;
    if (opts.record_trace && (out.n_updates % std::max<std::size_t>(opts.trace_every, 1)) == 0) {
      out.first.jump_times.push_back(t);
      out.first.jump_states.push_back(x1);
      out.second.jump_times.push_back(t);
      out.second.jump_states.push_back(x2);
    }
    check_event_cap(out.n_updates, opts, t);
    refresh();
  }
  grid.rest(emit);
  return out;
}

}  // namespace detail

/// Everything needed to generate one coupled pair.
struct PairSpec {
  const ReactionNetwork* net = nullptr;
  ParamMap first_params;   // perturbed
  ParamMap second_params;  // nominal
  StateVec x0_first;
  StateVec x0_second;
};

/// Builds a PairSpec coupling theta+epsilon (first) with theta (second).
/// `x0_second` defaults to `x0`.
inline PairSpec make_pair_spec(const ReactionNetwork& net, const ParamMap& params,
                               const std::string& param, double epsilon, const StateVec& x0,
                               std::optional<StateVec> x0_second = std::nullopt) {
  PairSpec s;
  s.net = &net;
  s.first_params = perturb(params, param, epsilon);
  s.second_params = params;
  s.x0_first = x0;
  s.x0_second = x0_second.value_or(x0);
  return s;
}

inline CoupledPath simulate_pair(Coupling kind, const PairSpec& spec, const SimOptions& opts,
                                 const PathSeeds& seeds) {
  const ReactionNetwork& net = *spec.net;
  RateTable first(net, spec.first_params);
  RateTable second(net, spec.second_params);
  const std::size_t m = net.num_reactions();
  switch (kind) {
    case Coupling::kCFD: {
      std::vector<ClockStream> c1, c2, c3;
      for (std::size_t k = 0; k < m; ++k) {
        c1.emplace_back(seeds(k, role::kShared));
        c2.emplace_back(seeds(k, role::kFirstOnly));
        c3.emplace_back(seeds(k, role::kSecondOnly));
      }
      return detail::run_split_coupling(first, second, spec.x0_first, spec.x0_second,
                                        std::span<ClockStream>(c1), std::span<ClockStream>(c2),
                                        std::span<ClockStream>(c3), opts, kind);
    }
    case Coupling::kNaive: {
      std::vector<ClockStream> c1;
      std::vector<ArrivalTape> residual;
      residual.reserve(m);
      for (std::size_t k = 0; k < m; ++k) {
        c1.emplace_back(seeds(k, role::kShared));
        residual.emplace_back(seeds(k, role::kFirstOnly));
      }
      std::vector<TapeCursor> c2, c3;
      for (std::size_t k = 0; k < m; ++k) {
        c2.emplace_back(residual[k]);
        c3.emplace_back(residual[k]);
      }
      return detail::run_split_coupling(first, second, spec.x0_first, spec.x0_second,
                                        std::span<ClockStream>(c1), std::span<TapeCursor>(c2),
                                        std::span<TapeCursor>(c3), opts, kind);
    }
    case Coupling::kCRP: {
      std::vector<ArrivalTape> tapes;
      tapes.reserve(m);
      for (std::size_t k = 0; k < m; ++k) tapes.emplace_back(seeds(k, role::kShared));
      auto run = [&](const RateTable& rates, const StateVec& x0) {
        std::vector<TapeCursor> cursors;
        for (auto& tape : tapes) cursors.emplace_back(tape);
        return run_next_reaction(rates, x0, std::span<TapeCursor>(cursors), opts);
      };
      CoupledPath out;
      out.kind = kind;
      out.first = run(first, spec.x0_first);
      out.second = run(second, spec.x0_second);
      out.n_updates = out.first.n_updates + out.second.n_updates;
      return out;
    }
    case Coupling::kCRN: {
      ArrivalTape holding(seeds(0, role::kShared));
      UniformTape xi(seeds(0, role::kSelection));
      CoupledPath out;
      out.kind = kind;
      out.first = run_gillespie(first, spec.x0_first, holding, xi, opts);
      out.second = run_gillespie(second, spec.x0_second, holding, xi, opts);
      out.n_updates = out.first.n_updates + out.second.n_updates;
      return out;
    }
    case Coupling::kIndependent: {
      auto run = [&](const RateTable& rates, const StateVec& x0, std::uint32_t r) {
        std::vector<ClockStream> clocks;
        for (std::size_t k = 0; k < m; ++k) clocks.emplace_back(seeds(k, r));
        return run_next_reaction(rates, x0, std::span<ClockStream>(clocks), opts);
      };
      CoupledPath out;
      out.kind = kind;
      out.first = run(first, spec.x0_first, role::kShared);
      out.second = run(second, spec.x0_second, role::kIndependent);
      out.n_updates = out.first.n_updates + out.second.n_updates;
      return out;
    }
  }
  throw SimulationError("unknown coupling");
}

inline CoupledPath simulate_cfd_pair(const ReactionNetwork& net, const ParamMap& params,
                                     const std::string& param, double epsilon, const StateVec& x0,
                                     const SimOptions& opts, const PathSeeds& seeds) {
  return simulate_pair(Coupling::kCFD, make_pair_spec(net, params, param, epsilon, x0), opts,
                       seeds);
}

inline CoupledPath simulate_crp_pair(const ReactionNetwork& net, const ParamMap& params,
                                     const std::string& param, double epsilon, const StateVec& x0,
                                     const SimOptions& opts, const PathSeeds& seeds) {
  return simulate_pair(Coupling::kCRP, make_pair_spec(net, params, param, epsilon, x0), opts,
                       seeds);
}

inline CoupledPath simulate_crn_pair(const ReactionNetwork& net, const ParamMap& params,
                                     const std::string& param, double epsilon, const StateVec& x0,
                                     const SimOptions& opts, const PathSeeds& seeds) {
  return simulate_pair(Coupling::kCRN, make_pair_spec(net, params, param, epsilon, x0), opts,
                       seeds);
}

/// Known-biased; see the file comment.
inline CoupledPath simulate_naive_pair(const ReactionNetwork& net, const ParamMap& params,
                                       const std::string& param, double epsilon,
                                       const StateVec& x0, const SimOptions& opts,
                                       const PathSeeds& seeds) {
  return simulate_pair(Coupling::kNaive, make_pair_spec(net, params, param, epsilon, x0), opts,
                       seeds);
}

}  // namespace ctmcsens
