#pragma once

#include <cmath>
#include <cstdint>

namespace ctmcsens {

/// Streaming (count, mean, M2) accumulator. merge() uses the pairwise update
/// of Chan, Golub and LeVeque; results depend on merge order only through
/// floating-point rounding, so callers fix that order.
class RunningStats {
 public:
  void push(double v) {
    ++n_;
    double d = v - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (v - mean_);
  }

  void merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    double n = static_cast<double>(n_ + o.n_);
    double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased (n - 1) sample variance; 0 for fewer than two samples.
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  /// Standard error of the mean.
  double standard_error() const {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

  friend bool operator==(const RunningStats&, const RunningStats&) = default;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Normal 97.5% quantile used for all 95% confidence intervals.
inline constexpr double kZ95 = 1.96;

}  // namespace ctmcsens
