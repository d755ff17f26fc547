#pragma once

// Shared test helpers: sample moments, two-sample KS, closed-form oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace testsupport {

/// Sample moments with standard errors for the mean and the variance.
struct Moments {
  double mean = 0, var = 0, se_mean = 0, se_var = 0;
};

inline Moments moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= n;
  double m2 = 0, m4 = 0;
  for (double x : v) {
    double d = x - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m.var = m2 / (n - 1);
  m4 /= n;
  m.se_mean = std::sqrt(m.var / n);
  m.se_var = std::sqrt(std::max(m4 - m.var * m.var, 0.0) / n);
  return m;
}

inline double combined(double a, double b) { return std::sqrt(a * a + b * b); }

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / static_cast<double>(a.size()) -
                             static_cast<double>(j) / static_cast<double>(b.size())));
  }
  return d;
}

inline double ks_two_sample_critical(double alpha, std::size_t n, std::size_t m) {
  double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) / static_cast<double>(n * m));
}

/// E P(t) for the gene network (M born at 2, dies at theta M; P made at
/// 10 M, dies at P), started empty.
inline double gene_mean_p(double theta, double t) {
  double a = 1.0 - std::exp(-t);
  double b = (std::exp(-theta * t) - std::exp(-t)) / (1.0 - theta);
  return (20.0 / theta) * (a - b);
}

/// dE P(t)/dtheta for the gene network, by a central difference of the
/// closed form.
inline double gene_sensitivity_p(double theta, double t, double h = 1e-6) {
  return (gene_mean_p(theta + h, t) - gene_mean_p(theta - h, t)) / (2 * h);
}

/// E X(t) of an M/M/inf queue (arrival a, per-customer death g) from x0.
inline double mmq_mean(double a, double g, double x0, double t) {
  return x0 * std::exp(-g * t) + (a / g) * (1.0 - std::exp(-g * t));
}

}  // namespace testsupport
