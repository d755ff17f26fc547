#pragma once

// Transient expectations E f(X(T)) on a truncated state box by
// uniformization: p(T) = sum_n Pois(n; L T) p0 P^n with P = I + Q / L.
// Jumps that would leave the box are dropped, so P is sub-stochastic and
// the mass it loses is reported as the leak.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ctmcsens/model/compiled.hpp"
#include "ctmcsens/model/network.hpp"

namespace ctmcsens {

/// Inclusive per-species bounds.
using Box = std::vector<std::pair<Count, Count>>;

class TruncatedGenerator {
 public:
  struct Transition {
    std::size_t from;
    std::size_t to;
    double rate;
  };

  TruncatedGenerator(const ReactionNetwork& net, const ParamMap& params, Box box)
      : box_(std::move(box)) {
    const std::size_t d = net.num_species();
    if (box_.size() != d) throw std::invalid_argument("box dimension != number of species");
    size_ = 1;
    for (auto [lo, hi] : box_) {
      if (lo < 0 || hi < lo) throw std::invalid_argument("invalid box bounds");
      size_ *= static_cast<std::size_t>(hi - lo + 1);
    }
    outflow_.assign(size_, 0.0);
    RateTable rates(net, params);
    StateVec x(d), y(d);
    for (std::size_t s = 0; s < size_; ++s) {
      decode(s, x);
      for (std::size_t k = 0; k < rates.size(); ++k) {
        double r = rates(k, x);
        if (r <= 0.0) continue;
        outflow_[s] += r;
        for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + rates.zeta(k)[i];
        if (auto t = encode(y)) transitions_.push_back({s, *t, r});
      }
      uniform_rate_ = std::max(uniform_rate_, outflow_[s]);
    }
  }

  std::size_t size() const { return size_; }
  double uniform_rate() const { return uniform_rate_; }
  const std::vector<double>& outflow() const { return outflow_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const Box& box() const { return box_; }

  void decode(std::size_t s, StateVec& x) const {
    for (std::size_t i = 0; i < box_.size(); ++i) {
      auto width = static_cast<std::size_t>(box_[i].second - box_[i].first + 1);
      x[i] = box_[i].first + static_cast<Count>(s % width);
      s /= width;
    }
  }

  std::optional<std::size_t> encode(const StateVec& x) const {
    std::size_t s = 0;
    std::size_t stride = 1;
    for (std::size_t i = 0; i < box_.size(); ++i) {
      if (x[i] < box_[i].first || x[i] > box_[i].second) return std::nullopt;
      s += static_cast<std::size_t>(x[i] - box_[i].first) * stride;
      stride *= static_cast<std::size_t>(box_[i].second - box_[i].first + 1);
    }
    return s;
  }

  /// One step of the uniformized chain: q = p P.
  void step(const std::vector<double>& p, std::vector<double>& q) const {
    const double inv = 1.0 / uniform_rate_;
    for (std::size_t s = 0; s < size_; ++s) q[s] = p[s] * (1.0 - outflow_[s] * inv);
    for (const auto& tr : transitions_) q[tr.to] += p[tr.from] * tr.rate * inv;
  }

 private:
  Box box_;
  std::size_t size_ = 0;
  double uniform_rate_ = 0.0;
  std::vector<double> outflow_;
  std::vector<Transition> transitions_;
};

struct ExactExpectation {
  double value = 0.0;
  /// Probability lost through the box boundary (>= 0).
  double leak = 0.0;
  /// Total probability left in the box; 1 - leak up to the series tail.
  double box_mass = 0.0;
  std::size_t terms = 0;
  std::vector<double> distribution;
};

/// E f(X(T)) within `tol`; throws std::runtime_error if the leak exceeds tol.
inline ExactExpectation exact_expectation(const ReactionNetwork& net, const ParamMap& params,
                                          const StateVec& x0, double horizon, const Expr& f,
                                          const Box& box, double tol) {
  TruncatedGenerator gen(net, params, box);
  auto start = gen.encode(x0);
  if (!start) throw std::invalid_argument("initial state lies outside the box");
  CompiledExpr fc(f, params);
  std::vector<double> fvals(gen.size());
  double fmax = 0.0;
  StateVec x(net.num_species());
  for (std::size_t s = 0; s < gen.size(); ++s) {
    gen.decode(s, x);
    fvals[s] = fc(x);
    fmax = std::max(fmax, std::abs(fvals[s]));
  }
  ExactExpectation out;
  out.distribution.assign(gen.size(), 0.0);
  const double lt = gen.uniform_rate() * horizon;
  if (horizon == 0.0 || gen.uniform_rate() == 0.0) {
    out.distribution[*start] = 1.0;
    out.value = fvals[*start];
    out.box_mass = 1.0;
    return out;
  }
  const double tail_tol = fmax > 0.0 ? tol / (2.0 * fmax) : tol;
  std::vector<double> p(gen.size(), 0.0), q(gen.size());
  p[*start] = 1.0;
  double cumulative = 0.0;
  const double log_lt = std::log(lt);
  for (std::size_t n = 0;; ++n) {
    double w = std::exp(-lt + static_cast<double>(n) * log_lt -
                        std::lgamma(static_cast<double>(n) + 1.0));
    if (w > 0.0)
      for (std::size_t s = 0; s < gen.size(); ++s) out.distribution[s] += w * p[s];
    cumulative += w;
    out.terms = n + 1;
    if (static_cast<double>(n) > lt && 1.0 - cumulative < tail_tol) break;
    if (n > 10 * static_cast<std::size_t>(lt) + 1000)
      throw std::runtime_error("uniformization series failed to converge");
    gen.step(p, q);
    std::swap(p, q);
  }
  double mass = 0.0;
  for (std::size_t s = 0; s < gen.size(); ++s) {
    mass += out.distribution[s];
    out.value += out.distribution[s] * fvals[s];
  }
  out.box_mass = mass;
  out.leak = std::max(0.0, cumulative - mass);
  if (out.leak > tol)
    throw std::runtime_error("box too small: probability leak " + std::to_string(out.leak) +
                             " exceeds tolerance");
  return out;
}

}  // namespace ctmcsens
