#pragma once

// Text serializations of estimator output: CSV rows, key-value blocks and a
// human summary.

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ctmcsens/estimators/estimate.hpp"
#include "ctmcsens/model/expr.hpp"

namespace ctmcsens {

inline constexpr const char* kCsvHeader =
    "method,param,theta,epsilon,mode,T,R,seed,estimate,var_d,ci95,n_updates,elapsed_s";

inline constexpr const char* kTraceCsvHeader = "method,t,R,mean_d,var_d,var_estimator";

/// Shortest decimal form that reads back to the same double.
inline std::string fmt(double v) { return detail::format_number(v); }

inline std::string csv_row(const EstimateReport& r) {
  std::ostringstream os;
  os << to_string(r.method) << ',' << r.param << ',' << fmt(r.theta) << ',' << fmt(r.epsilon)
     << ',' << (r.method == Method::kGirsanov ? "score" : to_string(r.mode)) << ','
     << fmt(r.horizon) << ',' << r.paths << ',' << r.seed << ',' << fmt(r.estimate) << ','
     << fmt(r.sample_variance) << ',' << fmt(r.ci95) << ',' << r.n_updates << ','
     << fmt(r.elapsed_s);
  return os.str();
}

/// One `key: value` line per field.
inline std::string kv_text(const EstimateReport& r) {
  std::ostringstream os;
  os << "method: " << to_string(r.method) << '\n'
     << "param: " << r.param << '\n'
     << "theta: " << fmt(r.theta) << '\n'
     << "epsilon: " << fmt(r.epsilon) << '\n'
     << "mode: " << (r.method == Method::kGirsanov ? "score" : to_string(r.mode)) << '\n'
     << "T: " << fmt(r.horizon) << '\n'
     << "R: " << r.paths << '\n'
     << "seed: " << r.seed << '\n'
     << "estimate: " << fmt(r.estimate) << '\n'
     << "var_d: " << fmt(r.sample_variance) << '\n'
     << "ci95: " << fmt(r.ci95) << '\n'
     << "n_updates: " << r.n_updates << '\n'
     << "elapsed_s: " << fmt(r.elapsed_s) << '\n';
  if (!r.warning.empty()) os << "warning: " << r.warning << '\n';
  return os.str();
}

inline std::string human_summary(const EstimateReport& r) {
  std::ostringstream os;
  if (!r.warning.empty()) os << "WARNING: " << r.warning << "\n";
  os << to_string(r.method) << " estimate of d/d" << r.param << " E f(X(" << fmt(r.horizon)
     << ")) at " << r.param << "=" << fmt(r.theta);
  if (r.method != Method::kGirsanov)
    os << ", " << to_string(r.mode) << " epsilon=" << fmt(r.epsilon);
  os << "\n";
  os << std::setprecision(6) << "  " << r.estimate << " +/- " << r.ci95 << " (95% CI, R=" << r.paths
     << ", Var(d)=" << r.sample_variance << ")\n";
  os << "  updates: " << r.n_updates << ", elapsed: " << std::setprecision(3) << r.elapsed_s
     << " s, seed: " << r.seed << "\n";
  return os.str();
}

inline void write_trace_csv(std::ostream& os, const std::vector<VarianceTrace>& traces) {
  os << kTraceCsvHeader << '\n';
  for (const auto& tr : traces) {
    auto est = tr.estimator_variance();
    for (std::size_t j = 0; j < tr.times.size(); ++j)
      os << to_string(tr.method) << ',' << fmt(tr.times[j]) << ',' << tr.paths << ','
         << fmt(tr.mean_d[j]) << ',' << fmt(tr.variance_d[j]) << ',' << fmt(est[j]) << '\n';
  }
}

/// Path trace: one row per recorded jump, `component,t,<species...>`.
inline void write_path_csv(std::ostream& os, const std::vector<std::string>& species,
                           const std::vector<std::pair<std::string, const PathRecord*>>& paths) {
  os << "component,t";
  for (const auto& s : species) os << ',' << s;
  os << '\n';
  auto row = [&](const std::string& name, double t, const StateVec& x) {
    os << name << ',' << fmt(t);
    for (Count v : x) os << ',' << v;
    os << '\n';
  };
  for (const auto& [name, rec] : paths) {
    row(name, 0.0, rec->initial);
    for (std::size_t j = 0; j < rec->jump_times.size(); ++j)
      row(name, rec->jump_times[j], rec->jump_states[j]);
    row(name, rec->horizon, rec->terminal);
  }
}

}  // namespace ctmcsens
