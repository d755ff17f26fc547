#pragma once

// First-moment equations for networks whose drift
//   F(x) = sum_k l_k(x) zeta_k
// is affine, F(x) = A x + b. For such networks m(t) = E X(t) solves
// m' = A m + b exactly.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ctmcsens/model/network.hpp"
#include "ctmcsens/streams/rng.hpp"

namespace ctmcsens {

class NonAffineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AffineMomentSystem {
  std::vector<std::vector<double>> a;  // d x d, row major
  std::vector<double> b;
  bool valid = false;
  double max_residual = 0.0;

  std::vector<double> drift(const std::vector<double>& m) const {
    std::vector<double> out(b);
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i] += a[i][j] * m[j];
    return out;
  }
};

inline std::vector<double> drift_at(const ReactionNetwork& net, const ParamMap& params,
                                    const StateVec& x) {
  std::vector<double> f(net.num_species(), 0.0);
  for (std::size_t k = 0; k < net.num_reactions(); ++k) {
    double l = eval_propensity(net, k, x, params);
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] += l * static_cast<double>(net.reactions[k].zeta[i]);
  }
  return f;
}

/// Probes F at 0 and the unit vectors, then checks the fit at `probes`
/// pseudo-random states with coordinates in [0, 30].
inline AffineMomentSystem extract_affine(const ReactionNetwork& net, const ParamMap& params,
                                         int probes = 50) {
  const std::size_t d = net.num_species();
  AffineMomentSystem sys;
  sys.b = drift_at(net, params, StateVec(d, 0));
  sys.a.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t j = 0; j < d; ++j) {
    StateVec e(d, 0);
    e[j] = 1;
    auto fj = drift_at(net, params, e);
    for (std::size_t i = 0; i < d; ++i) sys.a[i][j] = fj[i] - sys.b[i];
  }
  SplitMix64 rng(0x5eed0fa1f1eULL);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    StateVec x(d);
    std::vector<double> xm(d);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = static_cast<Count>(rng() % 31);
      xm[i] = static_cast<double>(x[i]);
    }
    auto exact = drift_at(net, params, x);
    auto fit = sys.drift(xm);
    for (std::size_t i = 0; i < d; ++i) {
      double scale = std::max(1.0, std::abs(exact[i]));
      worst = std::max(worst, std::abs(exact[i] - fit[i]) / scale);
    }
  }
  sys.max_residual = worst;
  sys.valid = worst <= 1e-9;
  return sys;
}

/// Classical fourth-order Runge-Kutta on m' = A m + b, m(0) = x0, with the
/// step shrunk so that it divides T.
inline std::vector<double> integrate_moments(const AffineMomentSystem& sys,
                                             const std::vector<double>& m0, double horizon,
                                             double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be > 0");
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
  std::vector<double> m = m0;
  if (horizon == 0.0) return m;
  auto n = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  double h = horizon / static_cast<double>(n);
  const std::size_t d = m.size();
  std::vector<double> tmp(d);
  for (std::size_t s = 0; s < n; ++s) {
    auto k1 = sys.drift(m);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = m[i] + 0.5 * h * k1[i];
    auto k2 = sys.drift(tmp);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = m[i] + 0.5 * h * k2[i];
    auto k3 = sys.drift(tmp);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = m[i] + h * k3[i];
    auto k4 = sys.drift(tmp);
    for (std::size_t i = 0; i < d; ++i) m[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return m;
}

/// E X(T) for an affine network; throws NonAffineError otherwise.
inline std::vector<double> mean_ode(const ReactionNetwork& net, const ParamMap& params,
                                    const StateVec& x0, double horizon, double step = 1e-3) {
  AffineMomentSystem sys = extract_affine(net, params);
  if (!sys.valid)
    throw NonAffineError("network '" + net.name +
                         "' is not affine; first-moment equations do not close (use the "
                         "uniformization oracle instead)");
  std::vector<double> m0(x0.begin(), x0.end());
  return integrate_moments(sys, m0, horizon, step);
}

/// dE X(T)/dtheta by a central difference of mean_ode at theta +- delta.
inline std::vector<double> mean_sensitivity_ode(const ReactionNetwork& net,
                                                const ParamMap& params, const std::string& param,
                                                const StateVec& x0, double horizon,
                                                double step = 1e-3, double delta = 1e-6) {
  auto up = mean_ode(net, perturb(params, param, delta), x0, horizon, step);
  auto down = mean_ode(net, perturb(params, param, -delta), x0, horizon, step);
  std::vector<double> out(up.size());
  for (std::size_t i = 0; i < up.size(); ++i) out[i] = (up[i] - down[i]) / (2 * delta);
  return out;
}

/// Mean and variance of X1 - X2 for the split coupling of two M/M/inf
/// queues whose arrival rates differ by eps: the difference is itself an
/// M/M/inf queue with arrival rate eps, so both equal (eps/g)(1 - e^{-g t}).
struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

inline MeanVariance mm_infty_coupled_moments(double /*theta*/, double epsilon,
                                             double death_rate, double t) {
  if (!(death_rate > 0.0)) throw std::invalid_argument("death rate must be > 0");
  double v = (epsilon / death_rate) * (1.0 - std::exp(-death_rate * t));
  return {v, v};
}

/// E X(t) of an M/M/inf queue started at x0.
inline double mm_infty_mean(double arrival, double death_rate, double x0, double t) {
  double e = std::exp(-death_rate * t);
  return x0 * e + (arrival / death_rate) * (1.0 - e);
}

/// eps^{-1} E[X^{1+eps/2}(1) - X^{1-eps/2}(1)] for the naive coupling of the
/// pure-death chain X -> 0 at rate theta X with X(0) = 1.
inline double naive_puredeath_difference(double epsilon) {
  return -std::exp(-1.0) * (2.0 / (2.0 + epsilon)) *
         (std::exp(epsilon / 2) - std::exp(-epsilon / 2));
}

}  // namespace ctmcsens
