#pragma once

// The ctmcsens command-line front end. run_cli() is the whole program; the
// executable only forwards argv and the standard streams.
//
// Exit codes: 0 success, 1 configuration error, 2 simulation/runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctmcsens/cli/report.hpp"
#include "ctmcsens/cli/svg.hpp"
#include "ctmcsens/estimators/estimate.hpp"
#include "ctmcsens/model/parser.hpp"
#include "ctmcsens/oracle/moments.hpp"
#include "ctmcsens/oracle/uniformization.hpp"
#include "ctmcsens/presets.hpp"

namespace ctmcsens::cli {

/// Invalid flags or inconsistent settings (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultSeed = 1;
inline constexpr const char* kSeedEnv = "CTMCSENS_SEED";

/// Raw flag values shared by the simulation subcommands.
struct CommonArgs {
  std::string preset;
  std::string model;
  std::string method = "cfd";
  std::string param;
  double theta = 0.0;
  double epsilon = 0.0;
  std::string mode = "centered";
  long long paths = 0;
  double horizon = 0.0;
  std::string observable;
  std::uint64_t seed = 0;
  long long workers = 1;
  bool no_timing = false;

  CLI::Option* theta_opt = nullptr;
  CLI::Option* epsilon_opt = nullptr;
  CLI::Option* paths_opt = nullptr;
  CLI::Option* horizon_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

/// A fully resolved experiment.
struct Experiment {
  std::string source;
  std::optional<BenchmarkPreset> preset;
  ReactionNetwork net;
  std::string param;
  double theta = 0.0;
  std::optional<double> epsilon;
  Difference mode = Difference::kCentered;
  std::string observable_text;
  Expr observable;
  double horizon = 0.0;
  std::size_t paths = 0;
  std::uint64_t seed = kDefaultSeed;
  std::size_t workers = 1;

  EstimatorConfig config() const {
    EstimatorConfig c;
    c.net = &net;
    c.param = param;
    c.theta = theta;
    c.epsilon = epsilon.value_or(0.0);
    c.mode = mode;
    c.observable = observable;
    c.horizon = horizon;
    c.paths = paths;
    c.seeds.base_seed = seed;
    c.workers = workers;
    return c;
  }
};

namespace detail {

inline void add_model_options(CLI::App& app, CommonArgs& a) {
  app.add_option("--preset", a.preset, "bundled model: " + [] {
    std::string s;
    for (const auto& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }());
  app.add_option("--model", a.model, "model file path");
  app.add_option("--param", a.param, "parameter to differentiate");
  a.theta_opt = app.add_option("--theta", a.theta, "nominal parameter value");
  app.add_option("--observable", a.observable, "observable f(x), e.g. P or \"M + 2*P\"");
  a.horizon_opt = app.add_option("--time,-T", a.horizon, "final time T");
}

inline void add_run_options(CLI::App& app, CommonArgs& a) {
  a.epsilon_opt = app.add_option("--epsilon", a.epsilon, "finite-difference perturbation");
  app.add_option("--mode", a.mode, "finite difference: centered or forward")
      ->check(CLI::IsMember({"centered", "forward"}));
  a.paths_opt = app.add_option("--paths,-R", a.paths, "number of sample paths R");
  a.seed_opt = app.add_option("--seed", a.seed, std::string("base seed (fallback: $") + kSeedEnv +
                                                    ", then " + std::to_string(kDefaultSeed) + ")");
  app.add_option("--workers", a.workers, "worker threads (0 = all cores)");
  app.add_flag("--no-timing", a.no_timing, "report elapsed_s as 0 for byte-stable output");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read model file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::uint64_t resolve_seed(const CommonArgs& a) {
  if (a.seed_opt && a.seed_opt->count() > 0) return a.seed;
  if (const char* env = std::getenv(kSeedEnv); env && *env) {
    try {
      std::size_t used = 0;
      unsigned long long v = std::stoull(env, &used, 0);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(kSeedEnv) + " is not an unsigned integer: '" + env + "'");
  }
  return kDefaultSeed;
}

inline std::size_t resolve_workers(long long w) {
  if (w < 0) throw ConfigError("workers must be >= 0");
  if (w == 0) return std::max(1u, std::thread::hardware_concurrency());
  return static_cast<std::size_t>(w);
}

/// Resolves preset/model defaults and validates the result. `needs_epsilon`
/// is true for finite-difference methods, false for the score method, and
/// nullopt when epsilon is irrelevant.
inline Experiment resolve(const CommonArgs& a, std::optional<bool> needs_epsilon) {
  Experiment e;
  if (!a.preset.empty() && !a.model.empty())
    throw ConfigError("--preset and --model are mutually exclusive");
  if (!a.preset.empty()) {
    e.preset = find_preset(a.preset);
    if (!e.preset) throw ConfigError("unknown preset '" + a.preset + "'");
    e.source = a.preset;
    e.net = parse_model(e.preset->model_text);
  } else if (!a.model.empty()) {
    e.source = a.model;
    try {
      e.net = parse_model(read_file(a.model));
    } catch (const ModelError& ex) {
      throw ConfigError("model file '" + a.model + "': " + ex.what());
    }
  } else {
    throw ConfigError("one of --preset or --model is required");
  }

  e.param = !a.param.empty() ? a.param : e.preset ? e.preset->param : "";
  if (e.param.empty()) {
    if (e.net.parameters.size() != 1)
      throw ConfigError("--param is required when the model declares " +
                        std::to_string(e.net.parameters.size()) + " parameters");
    e.param = e.net.parameters.begin()->first;
  }
  if (!e.net.parameters.count(e.param))
    throw ConfigError("unknown parameter '" + e.param + "' (--param)");
  e.theta = a.theta_opt && a.theta_opt->count() ? a.theta : e.net.parameters.at(e.param);
  e.net.parameters[e.param] = e.theta;

  bool eps_given = a.epsilon_opt && a.epsilon_opt->count() > 0;
  if (needs_epsilon.has_value() && !*needs_epsilon && eps_given)
    throw ConfigError("--epsilon is not used by the girsanov method");
  if (needs_epsilon.value_or(false)) {
    if (eps_given)
      e.epsilon = a.epsilon;
    else if (e.preset)
      e.epsilon = e.preset->epsilon;
    else
      throw ConfigError("--epsilon is required for finite-difference methods");
    if (!(*e.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  }
  e.mode = a.mode == "forward" ? Difference::kForward : Difference::kCentered;

  e.observable_text = !a.observable.empty() ? a.observable
                      : e.preset            ? e.preset->observable
                                            : e.net.species.front();
  try {
    e.observable = parse_observable(e.observable_text, e.net);
  } catch (const ModelError& ex) {
    throw ConfigError("--observable '" + e.observable_text + "': " + ex.what());
  }

  if (a.horizon_opt && a.horizon_opt->count())
    e.horizon = a.horizon;
  else if (e.preset)
    e.horizon = e.preset->horizon;
  else
    throw ConfigError("--time is required with --model");
  if (!(e.horizon >= 0.0) || !std::isfinite(e.horizon)) throw ConfigError("time must be >= 0");

  long long paths = a.paths_opt && a.paths_opt->count()
                        ? a.paths
                        : static_cast<long long>(e.preset ? e.preset->paths : 1000);
  if (paths < 1) throw ConfigError("paths must be ≥ 1");
  e.paths = static_cast<std::size_t>(paths);
  e.seed = resolve_seed(a);
  e.workers = resolve_workers(a.workers);
  return e;
}

inline Method resolve_method(const std::string& name) {
  auto m = parse_method(name);
  if (!m)
    throw ConfigError("unknown method '" + name +
                      "' (expected cmc, cfd, crp, crn, naive or girsanov)");
  return *m;
}

/// "a:b:s" (inclusive of b) or a comma-separated list.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("--grid: '" + s + "' is not a number");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("--grid expects start:stop:step");
    double a = num(parts[0]), b = num(parts[1]), s = num(parts[2]);
    if (!(s > 0.0)) throw ConfigError("--grid step must be > 0");
    for (std::size_t i = 0;; ++i) {
      double t = a + static_cast<double>(i) * s;
      if (t > b + 1e-9 * std::max(1.0, std::abs(b))) break;
      grid.push_back(std::min(t, b));
    }
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');)
      if (!p.empty()) grid.push_back(num(p));
  }
  if (grid.empty()) throw ConfigError("time grid is empty");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] < 0.0) throw ConfigError("time grid must be nonnegative");
    if (j > 0 && !(grid[j] > grid[j - 1]))
      throw ConfigError("time grid must be strictly increasing");
  }
  return grid;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ',');)
    if (!p.empty()) out.push_back(p);
  return out;
}

inline void append_csv(const std::string& path, const std::vector<EstimateReport>& rows) {
  bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream f(path, std::ios::app);
  if (!f) throw ConfigError("cannot open CSV file '" + path + "'");
  if (fresh) f << kCsvHeader << '\n';
  for (const auto& r : rows) f << csv_row(r) << '\n';
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

/// Coefficients (c0, c) with f(x) = c0 + c.x, or nullopt if f is not affine.
inline std::optional<std::pair<double, std::vector<double>>> affine_observable(
    const Expr& f, const ReactionNetwork& net) {
  CompiledExpr fc(f, net.parameters);
  const std::size_t d = net.num_species();
  StateVec x(d, 0);
  double c0 = fc(x);
  std::vector<double> c(d);
  for (std::size_t i = 0; i < d; ++i) {
    x.assign(d, 0);
    x[i] = 1;
    c[i] = fc(x) - c0;
  }
  SplitMix64 rng(0xfeed);
  for (int probe = 0; probe < 50; ++probe) {
    double fit = c0;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = static_cast<Count>(rng() % 31);
      fit += c[i] * static_cast<double>(x[i]);
    }
    double v = fc(x);
    if (std::abs(v - fit) > 1e-9 * std::max(1.0, std::abs(v))) return std::nullopt;
  }
  return std::make_pair(c0, c);
}

inline std::string ratio_label(double eps) {
  double inv = 1.0 / eps;
  if (std::abs(inv - std::round(inv)) < 1e-9) return "1/" + fmt(std::round(inv));
  return fmt(eps);
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  CommonArgs common;
  std::string format = "text";
  std::string csv;
  double baseline = 0.0;
};

inline int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  Method method = resolve_method(a.common.method);
  Experiment e = resolve(a.common, method != Method::kGirsanov);
  EstimatorConfig c = e.config();
  c.girsanov_baseline = a.baseline;
  EstimateReport r = method == Method::kGirsanov ? estimate_girsanov(c) : estimate_fd(method, c);
  if (a.common.no_timing) r.elapsed_s = 0.0;
  if (!r.warning.empty() && a.format != "text") err << "warning: " << r.warning << "\n";
  if (a.format == "kv")
    out << kv_text(r);
  else if (a.format == "csv")
    out << kCsvHeader << '\n' << csv_row(r) << '\n';
  else
    out << "model: " << e.source << ", observable: " << e.observable_text << "\n"
        << human_summary(r);
  if (!a.csv.empty()) append_csv(a.csv, {r});
  return 0;
}

// ------------------------------------------------------------------- trace

struct TraceArgs {
  CommonArgs common;
  std::string methods;
  std::string grid;
  std::string out;
  std::string svg;
  bool log_y = false;
};

inline int cmd_trace(const TraceArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> names =
      split_list(!a.methods.empty() ? a.methods : a.common.method);
  if (names.empty()) throw ConfigError("--methods is empty");
  std::vector<Method> methods;
  bool any_fd = false;
  for (const auto& n : names) {
    methods.push_back(resolve_method(n));
    any_fd = any_fd || methods.back() != Method::kGirsanov;
  }
  if (a.grid.empty()) throw ConfigError("--grid is required (start:stop:step or a list)");
  std::vector<double> grid = parse_grid(a.grid);
  Experiment e = resolve(a.common, any_fd);
  if (a.common.horizon_opt && a.common.horizon_opt->count() && grid.back() > e.horizon)
    throw ConfigError("time grid extends beyond --time");
  e.horizon = grid.back();

  std::vector<VarianceTrace> traces;
  for (Method m : methods) {
    traces.push_back(variance_trace(m, e.config(), grid));
    if (m == Method::kNaive) err << "warning: " << kNaiveWarning << "\n";
  }
  if (a.out.empty()) {
    write_trace_csv(out, traces);
  } else {
    std::ofstream f(a.out);
    if (!f) throw ConfigError("cannot write '" + a.out + "'");
    write_trace_csv(f, traces);
  }
  if (!a.svg.empty()) {
    std::vector<ChartSeries> series;
    for (const auto& tr : traces)
      series.push_back({to_string(tr.method), tr.times, tr.estimator_variance()});
    ChartOptions opt;
    opt.title = "Variance of the estimators, " + e.source + " (R=" + std::to_string(e.paths) +
                (any_fd ? ", epsilon=" + fmt(*e.epsilon) : std::string()) + ")";
    opt.y_label = "Var(D_R)(t)";
    opt.log_y = a.log_y;
    write_text(a.svg, line_chart_svg(series, opt));
  }
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  CommonArgs common;
  std::string algorithm = "nrm";
  long long path = 0;
  long long every = 1;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& /*err*/) {
  static const std::vector<std::string> kAlgorithms{"nrm", "gillespie", "cfd", "crp",
                                                    "crn", "naive",     "cmc"};
  if (std::find(kAlgorithms.begin(), kAlgorithms.end(), a.algorithm) == kAlgorithms.end())
    throw ConfigError("unknown algorithm '" + a.algorithm + "'");
  if (a.path < 0) throw ConfigError("path index must be >= 0");
  if (a.every < 1) throw ConfigError("--every must be >= 1");
  bool pair = a.algorithm != "nrm" && a.algorithm != "gillespie";
  Experiment e = resolve(a.common, pair ? std::optional<bool>(true) : std::nullopt);
  SimOptions opts;
  opts.horizon = e.horizon;
  opts.record_trace = true;
  opts.trace_every = static_cast<std::size_t>(a.every);
  PathSeeds seeds{SeedPlan{e.seed}, static_cast<std::uint64_t>(a.path)};
  StateVec x0 = initial_state(e.net);
  if (a.algorithm == "nrm") {
    PathRecord rec = simulate_nrm(e.net, e.net.parameters, x0, opts, seeds);
    write_path_csv(out, e.net.species, {{"x", &rec}});
  } else if (a.algorithm == "gillespie") {
    ArrivalTape holding(seeds(0, role::kShared));
    UniformTape xi(seeds(0, role::kSelection));
    PathRecord rec = simulate_gillespie(e.net, e.net.parameters, x0, opts, holding, xi);
    write_path_csv(out, e.net.species, {{"x", &rec}});
  } else {
    Method m = resolve_method(a.algorithm);
    PairSpec spec;
    spec.net = &e.net;
    double eps = *e.epsilon;
    if (e.mode == Difference::kCentered) {
      spec.first_params = with_param(e.net.parameters, e.param, e.theta + eps / 2);
      spec.second_params = with_param(e.net.parameters, e.param, e.theta - eps / 2);
    } else {
      spec.first_params = with_param(e.net.parameters, e.param, e.theta + eps);
      spec.second_params = e.net.parameters;
    }
    spec.x0_first = x0;
    spec.x0_second = x0;
    CoupledPath cp = simulate_pair(coupling_of(m), spec, opts, seeds);
    write_path_csv(out, e.net.species, {{"first", &cp.first}, {"second", &cp.second}});
  }
  return 0;
}

// ------------------------------------------------------------------ oracle

struct OracleArgs {
  CommonArgs common;
  std::string target;
  std::string quantity = "mean";
  std::string box;
  double tol = 1e-8;
  double step = 1e-3;
  double delta = 0.0;
  CLI::Option* delta_opt = nullptr;
};

inline Box parse_box(const std::string& text, std::size_t d) {
  Box box;
  for (const auto& part : split_list(text)) {
    auto colon = part.find(':');
    if (colon == std::string::npos) throw ConfigError("--box expects lo:hi,lo:hi,...");
    try {
      box.emplace_back(std::stoll(part.substr(0, colon)), std::stoll(part.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ConfigError("--box: cannot parse '" + part + "'");
    }
  }
  if (box.size() != d)
    throw ConfigError("--box needs " + std::to_string(d) + " ranges, one per species");
  return box;
}

inline int cmd_oracle(OracleArgs a, std::ostream& out, std::ostream& /*err*/) {
  if (!a.target.empty()) {
    if (!a.common.preset.empty() || !a.common.model.empty())
      throw ConfigError("give the model either positionally or with --preset/--model");
    if (find_preset(a.target))
      a.common.preset = a.target;
    else
      a.common.model = a.target;
  }
  static const std::vector<std::string> kQuantities{"mean", "sensitivity", "exact",
                                                    "exact-sensitivity"};
  if (std::find(kQuantities.begin(), kQuantities.end(), a.quantity) == kQuantities.end())
    throw ConfigError("unknown quantity '" + a.quantity +
                      "' (expected mean, sensitivity, exact or exact-sensitivity)");
  Experiment e = resolve(a.common, std::nullopt);
  const StateVec x0 = initial_state(e.net);
  const ParamMap& params = e.net.parameters;

  out << "model: " << e.source << "\n"
      << "quantity: " << a.quantity << "\n"
      << "observable: " << e.observable_text << "\n"
      << "T: " << fmt(e.horizon) << "\n";
  if (a.quantity == "sensitivity" || a.quantity == "exact-sensitivity")
    out << "param: " << e.param << "\n" << "theta: " << fmt(e.theta) << "\n";

  if (a.quantity == "mean" || a.quantity == "sensitivity") {
    if (!extract_affine(e.net, params).valid)
      throw ConfigError("network '" + e.net.name +
                        "' is not affine, so the moment equations do not close; use "
                        "--quantity exact (uniformization) instead");
    auto lin = affine_observable(e.observable, e.net);
    if (!lin)
      throw ConfigError("observable '" + e.observable_text +
                        "' is not affine in the state; use --quantity exact instead");
    auto apply = [&](const std::vector<double>& m, bool derivative) {
      double v = derivative ? 0.0 : lin->first;
      for (std::size_t i = 0; i < m.size(); ++i) v += lin->second[i] * m[i];
      return v;
    };
    double value, coarse;
    double delta = a.delta_opt && a.delta_opt->count() ? a.delta : 1e-6;
    if (a.quantity == "mean") {
      value = apply(mean_ode(e.net, params, x0, e.horizon, a.step), false);
      coarse = apply(mean_ode(e.net, params, x0, e.horizon, 2 * a.step), false);
      out << "method: first-moment ODE, RK4 step " << fmt(a.step) << "\n";
    } else {
      value = apply(mean_sensitivity_ode(e.net, params, e.param, x0, e.horizon, a.step, delta),
                    true);
      coarse = apply(
          mean_sensitivity_ode(e.net, params, e.param, x0, e.horizon, 2 * a.step, delta), true);
      out << "method: central difference (delta " << fmt(delta)
          << ") of the first-moment ODE, RK4 step " << fmt(a.step) << "\n";
    }
    out << "value: " << fmt(value) << "\n"
        << "error_estimate: " << fmt(std::abs(value - coarse) / 15.0) << "\n";
    return 0;
  }

  Box box;
  if (!a.box.empty())
    box = parse_box(a.box, e.net.num_species());
  else if (e.preset)
    box = e.preset->box;
  else
    throw ConfigError("--box is required for the exact oracle with --model");
  if (a.quantity == "exact") {
    ExactExpectation r = exact_expectation(e.net, params, x0, e.horizon, e.observable, box, a.tol);
    std::string box_text;
    for (auto [lo, hi] : box)
      box_text += (box_text.empty() ? "" : ",") + std::to_string(lo) + ":" + std::to_string(hi);
    out << "method: uniformization, " << r.terms << " terms, box " << box_text << "\n"
        << "value: " << fmt(r.value) << "\n"
        << "tolerance: " << fmt(a.tol) << "\n"
        << "leak: " << fmt(r.leak) << "\n";
    return 0;
  }
  double delta = a.delta_opt && a.delta_opt->count() ? a.delta : 1e-4;
  auto at = [&](double shift) {
    return exact_expectation(e.net, perturb(params, e.param, shift), x0, e.horizon,
                             e.observable, box, a.tol)
        .value;
  };
  double value = (at(delta / 2) - at(-delta / 2)) / delta;
  out << "method: central difference (delta " << fmt(delta) << ") of uniformization\n"
      << "value: " << fmt(value) << "\n"
      << "tolerance: " << fmt(2 * a.tol / delta) << " plus O(delta^2)\n";
  return 0;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  CommonArgs common;
  int table = 0;
  std::string rows;
  std::string methods;
  double target_ci = 6.0;
  long long pilot = 1000;
  int max_rounds = 6;
  bool plan_only = false;
  std::string csv;
};

inline std::vector<std::size_t> parse_rows(const std::string& text,
                                           std::vector<std::size_t> fallback) {
  if (text.empty()) return fallback;
  std::vector<std::size_t> out;
  for (const auto& p : split_list(text)) {
    long long v = 0;
    try {
      v = std::stoll(p);
    } catch (const std::exception&) {
      throw ConfigError("--rows: '" + p + "' is not an integer");
    }
    if (v < 1) throw ConfigError("paths must be ≥ 1");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& /*err*/) {
  if (a.table < 1 || a.table > 3) throw ConfigError("--table must be 1, 2 or 3");
  CommonArgs common = a.common;
  if (common.preset.empty() && common.model.empty()) common.preset = "gene";
  if (common.preset != "gene")
    throw ConfigError("bench tables are defined for the gene preset only");
  Experiment e = resolve(common, std::nullopt);
  std::vector<EstimateReport> rows;
  auto run = [&](Method m, std::size_t paths, double eps) {
    EstimatorConfig c = e.config();
    c.paths = paths;
    c.epsilon = eps;
    EstimateReport r = m == Method::kGirsanov ? estimate_girsanov(c) : estimate_fd(m, c);
    if (common.no_timing) r.elapsed_s = 0.0;
    rows.push_back(r);
    return r;
  };
  auto interval = [](const EstimateReport& r) {
    return fixed(r.estimate, 1) + " +/- " + fixed(r.ci95, 1);
  };

  const StateVec x0 = initial_state(e.net);
  const std::size_t obs = *e.net.species_index("P");
  auto oracle_mean = [&](double theta) {
    return mean_ode(e.net, with_param(e.net.parameters, e.param, theta), x0, e.horizon)[obs];
  };
  auto centered_oracle = [&](double eps) {
    return (oracle_mean(e.theta + eps / 2) - oracle_mean(e.theta - eps / 2)) / eps;
  };
  double exact =
      mean_sensitivity_ode(e.net, e.net.parameters, e.param, x0, e.horizon)[obs];

  out << "Table " << a.table << ": gene network, f = P, T = " << fmt(e.horizon) << ", "
      << e.param << " = " << fmt(e.theta) << ", seed " << e.seed << "\n";
  std::vector<double> footer_eps;
  if (a.table == 1) {
    const double eps_a = 1.0 / 20, eps_b = 1.0 / 100;
    footer_eps = {eps_a, eps_b};
    out << std::left << std::setw(6) << "Method" << std::right << std::setw(8) << "R"
        << std::setw(22) << "eps = 1/20" << std::setw(22) << "eps = 1/100" << std::setw(12)
        << "# updates" << std::setw(12) << "time (s)" << "\n";
    for (std::size_t r : parse_rows(a.rows, {1000, 10000, 40000}))
      for (Method m : {Method::kCMC, Method::kCRP, Method::kCFD}) {
        EstimateReport ra = run(m, r, eps_a);
        EstimateReport rb = run(m, r, eps_b);
        double updates = 0.5 * static_cast<double>(ra.n_updates + rb.n_updates);
        double time = 0.5 * (ra.elapsed_s + rb.elapsed_s);
        out << std::left << std::setw(6) << to_string(m) << std::right << std::setw(8) << r
            << std::setw(22) << interval(ra) << std::setw(22) << interval(rb) << std::setw(12)
            << sci(updates) << std::setw(12) << fixed(time, 2) << "\n";
      }
  } else if (a.table == 2) {
    out << std::right << std::setw(8) << "R" << std::setw(22) << "approximation"
        << std::setw(12) << "# updates" << std::setw(12) << "time (s)" << "\n";
    for (std::size_t r : parse_rows(a.rows, {1000, 10000, 40000})) {
      EstimateReport rep = run(Method::kGirsanov, r, 0.0);
      out << std::setw(8) << r << std::setw(22) << interval(rep) << std::setw(12)
          << sci(static_cast<double>(rep.n_updates)) << std::setw(12) << fixed(rep.elapsed_s, 2)
          << "\n";
    }
  } else {
    const double eps = 1.0 / 40;
    footer_eps = {eps};
    if (a.pilot < 2) throw ConfigError("--pilot must be >= 2");
    if (!(a.target_ci > 0.0)) throw ConfigError("--target-ci must be > 0");
    const double target_var = std::pow(a.target_ci / kZ95, 2);
    std::vector<Method> methods;
    for (const auto& n : split_list(a.methods.empty() ? "girsanov,cmc,crp,cfd" : a.methods))
      methods.push_back(resolve_method(n));
    out << "target: 95% CI half-width <= " << fmt(a.target_ci) << ", eps = 1/40, pilot R = "
        << a.pilot << (a.plan_only ? " (plan only)" : "") << "\n";
    out << std::left << std::setw(10) << "Method" << std::right << std::setw(10) << "R"
        << std::setw(22) << "approximation" << std::setw(12) << "# updates" << std::setw(12)
        << "time (s)" << "\n";
    for (Method m : methods) {
      EstimateReport rep = run(m, static_cast<std::size_t>(a.pilot), eps);
      std::size_t planned = plan_paths(target_var, rep);
      double time = rep.elapsed_s;
      if (a.plan_only) {
        double per_path = static_cast<double>(rep.n_updates) / static_cast<double>(rep.paths);
        out << std::left << std::setw(10) << to_string(m) << std::right << std::setw(10)
            << planned << std::setw(22) << ("(pilot " + interval(rep) + ")") << std::setw(12)
            << sci(per_path * static_cast<double>(planned)) << std::setw(12)
            << fixed(rep.elapsed_s * static_cast<double>(planned) / static_cast<double>(rep.paths), 2)
            << "\n";
        continue;
      }
      for (int round = 0; round < a.max_rounds && rep.ci95 > a.target_ci; ++round) {
        std::size_t next = std::max(plan_paths(target_var, rep), rep.paths + rep.paths / 10 + 1);
        rep = run(m, next, eps);
        time += rep.elapsed_s;
      }
      out << std::left << std::setw(10) << to_string(m) << std::right << std::setw(10)
          << rep.paths << std::setw(22) << interval(rep) << std::setw(12)
          << sci(static_cast<double>(rep.n_updates)) << std::setw(12) << fixed(time, 2)
          << (rep.ci95 > a.target_ci ? "  (target not reached)" : "") << "\n";
    }
  }
  out << "oracle: d/d" << e.param << " E P(" << fmt(e.horizon) << ") = " << fixed(exact, 3)
      << ", E P(" << fmt(e.horizon) << ") = " << fixed(oracle_mean(e.theta), 3)
      << " (first-moment ODE)\n";
  for (double eps : footer_eps)
    out << "oracle: centered difference at eps = " << ratio_label(eps) << ": "
        << fixed(centered_oracle(eps), 3) << "\n";
  if (!a.csv.empty()) append_csv(a.csv, rows);
  return 0;
}

}  // namespace detail

/// Runs the command line and returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"ctmcsens: sensitivity estimation for stochastic reaction networks", "ctmcsens"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ctmcsens 1.0.0 (stream format " +
                                        std::to_string(kStreamFormatVersion) + ")");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "estimate d/dtheta E f(X(T))");
  add_model_options(*estimate, est.common);
  add_run_options(*estimate, est.common);
  estimate->add_option("--method", est.common.method, "cmc, cfd, crp, crn, naive or girsanov");
  estimate->add_option("--format", est.format, "stdout format: text, kv or csv")
      ->check(CLI::IsMember({"text", "kv", "csv"}));
  estimate->add_option("--csv", est.csv, "append a CSV row to this file");
  estimate->add_option("--baseline", est.baseline, "girsanov: subtract this constant from f");

  TraceArgs tr;
  auto* trace = app.add_subcommand("trace", "variance of the estimators versus time");
  add_model_options(*trace, tr.common);
  add_run_options(*trace, tr.common);
  trace->add_option("--method", tr.common.method, "single method");
  trace->add_option("--methods", tr.methods, "comma-separated methods, e.g. cmc,crp,cfd");
  trace->add_option("--grid", tr.grid, "times as start:stop:step or t1,t2,...");
  trace->add_option("--out", tr.out, "write the trace CSV here instead of stdout");
  trace->add_option("--svg", tr.svg, "write an SVG line chart");
  trace->add_flag("--log-y", tr.log_y, "logarithmic variance axis in the SVG");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "print one sample path (or pair) as CSV");
  add_model_options(*simulate, sim.common);
  add_run_options(*simulate, sim.common);
  simulate->add_option("--algorithm", sim.algorithm,
                       "nrm, gillespie, or a pairing: cfd, crp, crn, naive, cmc");
  simulate->add_option("--path", sim.path, "path index within the seed plan");
  simulate->add_option("--every", sim.every, "keep every n-th jump");

  OracleArgs ora;
  auto* oracle = app.add_subcommand("oracle", "analytic reference values");
  oracle->add_option("target", ora.target, "preset name or model file");
  oracle->add_option("quantity,--quantity", ora.quantity,
                     "mean, sensitivity, exact or exact-sensitivity");
  add_model_options(*oracle, ora.common);
  oracle->add_option("--box", ora.box, "uniformization box lo:hi per species");
  oracle->add_option("--tol", ora.tol, "uniformization tolerance");
  oracle->add_option("--step", ora.step, "RK4 step");
  ora.delta_opt = oracle->add_option("--delta", ora.delta, "parameter difference step");

  BenchArgs ben;
  auto* bench = app.add_subcommand("bench", "reproduce the gene-network tables");
  add_model_options(*bench, ben.common);
  add_run_options(*bench, ben.common);
  bench->add_option("--table", ben.table, "1 (CMC/CRP/CFD), 2 (girsanov) or 3 (cost to CI)")
      ->required();
  bench->add_option("--rows", ben.rows, "tables 1-2: comma-separated R values");
  bench->add_option("--methods", ben.methods, "table 3: methods to run");
  bench->add_option("--target-ci", ben.target_ci, "table 3: CI half-width target");
  bench->add_option("--pilot", ben.pilot, "table 3: pilot paths");
  bench->add_option("--max-rounds", ben.max_rounds, "table 3: re-planning rounds");
  bench->add_flag("--plan-only", ben.plan_only, "table 3: report planned R from the pilot only");
  bench->add_option("--csv", ben.csv, "append CSV rows to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    int code = app.exit(ex, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (estimate->parsed()) return cmd_estimate(est, out, err);
    if (trace->parsed()) return cmd_trace(tr, out, err);
    if (simulate->parsed()) return cmd_simulate(sim, out, err);
    if (oracle->parsed()) return cmd_oracle(ora, out, err);
    if (bench->parsed()) return cmd_bench(ben, out, err);
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  } catch (const NonAffineError& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  } catch (const ModelError& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace ctmcsens::cli
