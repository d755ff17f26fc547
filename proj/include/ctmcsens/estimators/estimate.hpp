#pragma once

// Sensitivity estimators for J(theta) = E f(X^theta(T)).
//
// Finite differences: d = (f(X1(T)) - f(X2(T))) / eps with (X1, X2) a pair
// at (theta + eps/2, theta - eps/2) (centered) or (theta + eps, theta)
// (forward), generated by one of the couplings in sim/coupled.hpp.
//
// Likelihood ratio ("Girsanov"): d = (f(X(T)) - b) S(T) with the pathwise
// score
//   S(t) = sum_k [ sum_{jumps of k} dl_k/l_k (X(t_j-)) - int_0^t dl_k(X(s)) ds ],
// dl_k the derivative of the propensity in theta and b a constant baseline
// (0 for the plain estimator).

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctmcsens/estimators/parallel.hpp"
#include "ctmcsens/estimators/stats.hpp"
#include "ctmcsens/model/compiled.hpp"
#include "ctmcsens/model/network.hpp"
#include "ctmcsens/sim/coupled.hpp"
#include "ctmcsens/sim/next_reaction.hpp"

namespace ctmcsens {

enum class Method { kCMC, kCFD, kCRP, kCRN, kNaive, kGirsanov };
enum class Difference { kForward, kCentered };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::kCMC: return "cmc";
    case Method::kCFD: return "cfd";
    case Method::kCRP: return "crp";
    case Method::kCRN: return "crn";
    case Method::kNaive: return "naive";
    case Method::kGirsanov: return "girsanov";
  }
  return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
  for (Method m : {Method::kCMC, Method::kCFD, Method::kCRP, Method::kCRN, Method::kNaive,
                   Method::kGirsanov})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

inline std::string to_string(Difference d) {
  return d == Difference::kForward ? "forward" : "centered";
}

inline Coupling coupling_of(Method m) {
  switch (m) {
    case Method::kCMC: return Coupling::kIndependent;
    case Method::kCFD: return Coupling::kCFD;
    case Method::kCRP: return Coupling::kCRP;
    case Method::kCRN: return Coupling::kCRN;
    case Method::kNaive: return Coupling::kNaive;
    case Method::kGirsanov: break;
  }
  throw std::invalid_argument("method has no coupling");
}

inline constexpr const char* kNaiveWarning =
    "biased coupling - demonstration only: the naive coupling does not preserve the marginal "
    "laws";

struct EstimatorConfig {
  const ReactionNetwork* net = nullptr;
  std::string param;
  /// Nominal parameter value; defaults to the network's value.
  std::optional<double> theta;
  double epsilon = 0.0;
  Difference mode = Difference::kCentered;
  Expr observable;
  double horizon = 0.0;
  std::size_t paths = 0;
  SeedPlan seeds;
  std::size_t workers = 1;
  /// Initial state; defaults to the network's.
  std::optional<StateVec> x0;
  /// Girsanov only: f is replaced by f - baseline.
  double girsanov_baseline = 0.0;
  std::uint64_t max_events = 100'000'000;
};

struct EstimateReport {
  Method method = Method::kCFD;
  std::string param;
  double theta = 0.0;
  double epsilon = 0.0;
  Difference mode = Difference::kCentered;
  double horizon = 0.0;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double sample_variance = 0.0;
  double ci95 = 0.0;
  std::uint64_t n_updates = 0;
  double elapsed_s = 0.0;
  std::string warning;

  /// Standard error of the estimate.
  double standard_error() const {
    return paths > 0 ? std::sqrt(sample_variance / static_cast<double>(paths)) : 0.0;
  }
};

/// Per-time statistics of the per-path contribution d(t), all times from
/// the same set of paths.
struct VarianceTrace {
  Method method = Method::kCFD;
  std::size_t paths = 0;
  std::vector<double> times;
  std::vector<double> mean_d;
  std::vector<double> variance_d;
  std::uint64_t n_updates = 0;

  /// Var(D_R)(t) = Var(d(t)) / R, the quantity plotted against time.
  std::vector<double> estimator_variance() const {
    std::vector<double> v(variance_d);
    for (double& x : v) x /= static_cast<double>(paths);
    return v;
  }
};

namespace detail {

/// Accumulates the score S(t) along a next-reaction path.
class ScoreObserver {
 public:
  ScoreObserver(const RateTable& rates, const std::vector<CompiledExpr>& drates,
                const CompiledExpr& f, double baseline, std::vector<double>& d_out)
      : rates_(&rates), drates_(&drates), f_(&f), baseline_(baseline), d_out_(&d_out) {}

  void on_jump(std::size_t k, const StateVec& x_before, double t) {
    integral_ += total_drate(x_before) * (t - last_t_);
    last_t_ = t;
    double l = (*rates_)(k, x_before);
    jump_sum_ += (*drates_)[k](x_before) / l;
  }

  void on_grid(std::size_t j, const StateVec& x, double t) {
    double score = jump_sum_ - (integral_ + total_drate(x) * (t - last_t_));
    (*d_out_)[j] = ((*f_)(x) - baseline_) * score;
  }

 private:
  double total_drate(const StateVec& x) const {
    double s = 0.0;
    for (const auto& dr : *drates_) s += dr(x);
    return s;
  }

  const RateTable* rates_;
  const std::vector<CompiledExpr>* drates_;
  const CompiledExpr* f_;
  double baseline_;
  std::vector<double>* d_out_;
  double jump_sum_ = 0.0;
  double integral_ = 0.0;
  double last_t_ = 0.0;
};

/// Shared by estimate_fd, estimate_girsanov and variance_trace: simulates
/// the paths and accumulates d at every grid time.
struct ChunkResult {
  std::vector<RunningStats> stats;
  std::uint64_t n_updates = 0;
};

inline void check_config(const EstimatorConfig& c, Method method) {
  if (c.net == nullptr) throw std::invalid_argument("estimator config has no network");
  if (!c.net->parameters.count(c.param))
    throw std::invalid_argument("unknown parameter '" + c.param + "'");
  if (c.paths < 1) throw std::invalid_argument("paths must be >= 1");
  if (!(c.horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
  if (method != Method::kGirsanov && !(c.epsilon > 0.0))
    throw std::invalid_argument("epsilon must be > 0 for finite-difference methods");
}

inline std::vector<ChunkResult> simulate_contributions(Method method, const EstimatorConfig& c,
                                                       const std::vector<double>& grid) {
  check_config(c, method);
  const ReactionNetwork& net = *c.net;
  const double theta = c.theta.value_or(net.parameters.at(c.param));
  const ParamMap nominal = with_param(net.parameters, c.param, theta);
  const StateVec x0 = c.x0.value_or(initial_state(net));
  const CompiledExpr f(c.observable, nominal);

  SimOptions opts;
  opts.horizon = grid.empty() ? c.horizon : std::max(c.horizon, grid.back());
  opts.grid = grid;
  opts.max_events = c.max_events;

  if (method == Method::kGirsanov) {
    RateTable rates(net, nominal);
    std::vector<CompiledExpr> drates;
    for (const auto& r : net.reactions)
      drates.emplace_back(diff_param(r.rate, c.param), nominal);
    return run_chunks<ChunkResult>(c.paths, c.workers, [&](std::size_t b, std::size_t e) {
      ChunkResult out;
      out.stats.resize(grid.size());
      std::vector<double> d(grid.size());
      for (std::size_t i = b; i < e; ++i) {
        try {
          std::vector<ClockStream> clocks;
          for (std::size_t k = 0; k < rates.size(); ++k)
            clocks.emplace_back(PathSeeds{c.seeds, i}(k, role::kShared));
          ScoreObserver obs(rates, drates, f, c.girsanov_baseline, d);
          PathRecord rec = run_next_reaction(rates, x0, std::span<ClockStream>(clocks), opts, obs);
          out.n_updates += rec.n_updates;
        } catch (const std::exception& ex) {
          throw SimulationError("path " + std::to_string(i) + ": " + ex.what());
        }
        for (std::size_t j = 0; j < grid.size(); ++j) out.stats[j].push(d[j]);
      }
      return out;
    });
  }

  PairSpec spec;
  spec.net = &net;
  if (c.mode == Difference::kCentered) {
    spec.first_params = with_param(nominal, c.param, theta + c.epsilon / 2);
    spec.second_params = with_param(nominal, c.param, theta - c.epsilon / 2);
  } else {
    spec.first_params = with_param(nominal, c.param, theta + c.epsilon);
    spec.second_params = nominal;
  }
  spec.x0_first = x0;
  spec.x0_second = x0;
  const Coupling coupling = coupling_of(method);
  return run_chunks<ChunkResult>(c.paths, c.workers, [&](std::size_t b, std::size_t e) {
    ChunkResult out;
    out.stats.resize(grid.size());
    for (std::size_t i = b; i < e; ++i) {
      CoupledPath pair;
      try {
        pair = simulate_pair(coupling, spec, opts, PathSeeds{c.seeds, i});
      } catch (const std::exception& ex) {
        throw SimulationError("path " + std::to_string(i) + ": " + ex.what());
      }
      out.n_updates += pair.n_updates;
      for (std::size_t j = 0; j < grid.size(); ++j)
        out.stats[j].push((f(pair.first.grid_states[j]) - f(pair.second.grid_states[j])) /
                          c.epsilon);
    }
    return out;
  });
}

inline ChunkResult reduce(const std::vector<ChunkResult>& chunks, std::size_t grid_size) {
  ChunkResult total;
  total.stats.resize(grid_size);
  for (const auto& ch : chunks) {
    for (std::size_t j = 0; j < grid_size; ++j) total.stats[j].merge(ch.stats[j]);
    total.n_updates += ch.n_updates;
  }
  return total;
}

inline EstimateReport run_estimate(Method method, const EstimatorConfig& c) {
  auto start = std::chrono::steady_clock::now();
  std::vector<double> grid{c.horizon};
  ChunkResult total = reduce(simulate_contributions(method, c, grid), 1);
  EstimateReport r;
  r.method = method;
  r.param = c.param;
  r.theta = c.theta.value_or(c.net->parameters.at(c.param));
  r.epsilon = method == Method::kGirsanov ? 0.0 : c.epsilon;
  r.mode = c.mode;
  r.horizon = c.horizon;
  r.paths = c.paths;
  r.seed = c.seeds.base_seed;
  r.estimate = total.stats[0].mean();
  r.sample_variance = total.stats[0].variance();
  r.ci95 = kZ95 * std::sqrt(r.sample_variance / static_cast<double>(c.paths));
  r.n_updates = total.n_updates;
  if (method == Method::kNaive) r.warning = kNaiveWarning;
  r.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace detail

/// Finite-difference estimate of J'(theta) with the given pairing method.
inline EstimateReport estimate_fd(Method method, const EstimatorConfig& config) {
  if (method == Method::kGirsanov)
    throw std::invalid_argument("estimate_fd: use estimate_girsanov for the score method");
  return detail::run_estimate(method, config);
}

/// Likelihood-ratio estimate of J'(theta); config.epsilon is ignored.
inline EstimateReport estimate_girsanov(const EstimatorConfig& config) {
  return detail::run_estimate(Method::kGirsanov, config);
}

/// Per-time variance of d(t) over one set of paths observed on `grid`
/// (nondecreasing, within (0, horizon]; the horizon is extended to the last
/// grid point).
inline VarianceTrace variance_trace(Method method, const EstimatorConfig& config,
                                    const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("time grid is empty");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] < 0.0) throw std::invalid_argument("time grid must be nonnegative");
    if (j > 0 && !(grid[j] > grid[j - 1]))
      throw std::invalid_argument("time grid must be strictly increasing");
  }
  detail::ChunkResult total =
      detail::reduce(detail::simulate_contributions(method, config, grid), grid.size());
  VarianceTrace tr;
  tr.method = method;
  tr.paths = config.paths;
  tr.times = grid;
  tr.n_updates = total.n_updates;
  for (const auto& s : total.stats) {
    tr.mean_d.push_back(s.mean());
    tr.variance_d.push_back(s.variance());
  }
  return tr;
}

/// Number of paths giving Var(D_R) = target_variance, from a pilot's Var(d).
inline std::size_t plan_paths(double target_variance, double pilot_variance) {
  if (!(target_variance > 0.0)) throw std::invalid_argument("target variance must be > 0");
  if (!std::isfinite(pilot_variance) || pilot_variance < 0.0)
    throw std::invalid_argument("pilot variance must be finite and >= 0");
  double r = std::ceil(pilot_variance / target_variance);
  return r < 1.0 ? 1 : static_cast<std::size_t>(r);
}

inline std::size_t plan_paths(double target_variance, const EstimateReport& pilot) {
  return plan_paths(target_variance, pilot.sample_variance);
}

/// Perturbation size balancing bias and variance: c R^{-1/5} for coupled
/// pairs, c R^{-1/6} for independent ones.
inline double suggest_epsilon(std::size_t paths, bool coupled, double constant = 1.0) {
  if (paths < 1) throw std::invalid_argument("paths must be >= 1");
  double exponent = coupled ? -1.0 / 5.0 : -1.0 / 6.0;
  return constant * std::pow(static_cast<double>(paths), exponent);
}

}  // namespace ctmcsens
