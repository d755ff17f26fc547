// Acceptance suite: one PASS/FAIL line per criterion. Criterion 6 runs only
// with --slow (or CTMCSENS_SLOW_TESTS=1 in the environment).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ctmcsens/cli/commands.hpp"
#include "ctmcsens/ctmcsens.hpp"
#include "support.hpp"

using namespace ctmcsens;
using namespace testsupport;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  bool slow;
  std::function<Outcome()> check;
};

std::string num(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

ReactionNetwork preset(const char* name) { return parse_model(find_preset(name)->model_text); }

EstimatorConfig config(const ReactionNetwork& net, const std::string& param, const char* obs,
                       double eps, double horizon, std::size_t paths, std::uint64_t seed) {
  EstimatorConfig c;
  c.net = &net;
  c.param = param;
  c.epsilon = eps;
  c.observable = parse_observable(obs, net);
  c.horizon = horizon;
  c.paths = paths;
  c.seeds = SeedPlan{seed};
  return c;
}

double cli_value(std::vector<std::string> args) {
  args.insert(args.begin(), "ctmcsens");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) throw std::runtime_error("cli exit " + std::to_string(code) + ": " + err.str());
  std::istringstream in(out.str());
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("value: ", 0) == 0) return std::stod(line.substr(7));
  throw std::runtime_error("cli output has no value line");
}

/// Raw differences f(first) - f(second) of forward-coupled pairs on a grid.
std::vector<std::vector<double>> raw_differences(Coupling kind, const ReactionNetwork& net,
                                                 const std::string& param, double eps,
                                                 std::size_t species, std::vector<double> grid,
                                                 std::size_t paths, std::uint64_t seed) {
  SimOptions o;
  o.horizon = grid.back();
  o.grid = grid;
  std::vector<std::vector<double>> out(grid.size());
  PairSpec spec = make_pair_spec(net, net.parameters, param, eps, initial_state(net));
  for (std::uint64_t i = 0; i < paths; ++i) {
    CoupledPath p = simulate_pair(kind, spec, o, PathSeeds{SeedPlan{seed}, i});
    for (std::size_t j = 0; j < grid.size(); ++j)
      out[j].push_back(static_cast<double>(p.first.grid_states[j][species] -
                                           p.second.grid_states[j][species]));
  }
  return out;
}

Outcome c1_oracle() {
  double s = cli_value({"oracle", "gene", "sensitivity"});
  double m = cli_value({"oracle", "gene", "mean"});
  bool ok = std::abs(s + 318.073) <= 0.01 && std::abs(m - 79.941) <= 0.01;
  return {ok, "sensitivity " + num(s, 8) + ", mean " + num(m, 7)};
}

Outcome c2_cfd_gene() {
  auto net = preset("gene");
  const double eps = 1.0 / 20;
  auto r = estimate_fd(Method::kCFD, config(net, "theta", "P", eps, 30, 10000, 2));
  double target = (gene_mean_p(0.25 + eps / 2, 30) - gene_mean_p(0.25 - eps / 2, 30)) / eps;
  double se = r.standard_error();
  bool ok = std::abs(r.estimate - target) <= 3 * se && r.ci95 <= 5.0;
  return {ok, "estimate " + num(r.estimate, 6) + " +/- " + num(r.ci95, 3) + ", oracle " +
                  num(target, 6) + ", |z| " + num(std::abs(r.estimate - target) / se, 3)};
}

Outcome c3_variance_ordering() {
  auto net = preset("gene");
  const double eps = 1.0 / 40;
  double v_cfd = estimate_fd(Method::kCFD, config(net, "theta", "P", eps, 30, 5000, 3)).sample_variance;
  double v_crp = estimate_fd(Method::kCRP, config(net, "theta", "P", eps, 30, 5000, 3)).sample_variance;
  double v_cmc = estimate_fd(Method::kCMC, config(net, "theta", "P", eps, 30, 5000, 3)).sample_variance;
  double cmc_ratio = v_cmc / v_cfd, crp_ratio = v_crp / v_cfd;
  bool ok = v_cfd < v_crp && v_crp < v_cmc && cmc_ratio >= 25 && cmc_ratio <= 100 &&
            crp_ratio >= 3 && crp_ratio <= 15;
  return {ok, "Var(d) cfd " + num(v_cfd) + ", crp " + num(v_crp) + ", cmc " + num(v_cmc) +
                  "; cmc/cfd " + num(cmc_ratio, 3) + ", crp/cfd " + num(crp_ratio, 3)};
}

Outcome c4_coupled_moments() {
  auto net = preset("mmq");
  const double eps = 0.01;
  std::vector<double> grid{5, 10, 30};
  auto z = raw_differences(Coupling::kCFD, net, "theta", eps, 0, grid, 10000, 4);
  bool ok = true;
  std::string detail;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double expected = (eps / 0.1) * (1.0 - std::exp(-0.1 * grid[j]));
    Moments m = moments(z[j]);
    bool mean_ok = std::abs(m.mean - expected) <= 4 * m.se_mean;
    bool var_ok = std::abs(m.var - expected) <= 4 * m.se_var;
    ok = ok && mean_ok && var_ok;
    detail += "t=" + num(grid[j]) + ": mean " + num(m.mean) + " var " + num(m.var) + " vs " +
              num(expected) + (j + 1 < grid.size() ? "; " : "");
  }
  return {ok, detail};
}

Outcome c5_variance_limit() {
  auto net = preset("mmq");
  auto tr = variance_trace(Method::kCFD, config(net, "theta", "M", 0.01, 100, 1000, 5), {100});
  double v = tr.estimator_variance()[0];
  return {v >= 0.7 && v <= 1.3, "Var(D_R)(100) = " + num(v)};
}

Outcome c6_decoupling() {
  auto net = preset("mmq");
  bool ok = true;
  std::string detail;
  for (Coupling c : {Coupling::kCRP, Coupling::kCRN}) {
    auto z = raw_differences(c, net, "theta", 0.01, 0, {10000}, 1000, 6);
    double v = moments(z[0]).var;
    ok = ok && v >= 30 && v <= 50;
    detail += to_string(c) + " Var(diff) " + num(v) + (c == Coupling::kCRP ? "; " : "");
  }
  return {ok, detail};
}

Outcome c7_naive() {
  auto net = preset("puredeath");
  auto run = [&](double eps) {
    return estimate_fd(Method::kNaive, config(net, "theta", "X", eps, 1, 100000, 7));
  };
  auto a = run(0.5);
  auto b = run(0.05);
  double closed_a = naive_puredeath_difference(0.5);
  double closed_b = naive_puredeath_difference(0.05);
  bool ok_a = std::abs(a.estimate - closed_a) <= 3 * a.standard_error() &&
              std::abs(closed_a + 0.14870) <= 2e-5;
  bool ok_b = std::abs(b.estimate + 0.01838) <= 3 * b.standard_error() &&
              std::abs(b.estimate - closed_b) <= 3 * b.standard_error();
  bool away = std::abs(b.estimate + std::exp(-1.0)) > 10 * b.standard_error();
  return {ok_a && ok_b && away && !a.warning.empty(),
          "eps=0.5: " + num(a.estimate, 5) + " (SE " + num(a.standard_error(), 3) +
              ", closed form " + num(closed_a, 5) + "); eps=0.05: " + num(b.estimate, 4) +
              " (SE " + num(b.standard_error(), 3) + ", closed form " + num(closed_b, 4) + ")"};
}

Outcome c8_toy() {
  std::vector<double> abs_diff, sq_diff;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    auto p = toy_poisson_coupling(13.1, 13.0, 1.0, PathSeeds{SeedPlan{8}, i});
    double z = static_cast<double>(p.first_total()) - static_cast<double>(p.second_total());
    abs_diff.push_back(std::abs(z));
    sq_diff.push_back(z * z);
  }
  Moments a = moments(abs_diff), s = moments(sq_diff);
  bool ok = std::abs(a.mean - 0.1) <= 4 * a.se_mean && std::abs(s.mean - 0.11) <= 4 * s.se_mean;
  return {ok, "E|Z1-Z2| " + num(a.mean) + " (SE " + num(a.se_mean, 2) + "), E(Z1-Z2)^2 " +
                  num(s.mean) + " (SE " + num(s.se_mean, 2) + ")"};
}

Outcome c9_girsanov() {
  auto gene = preset("gene");
  auto r = estimate_girsanov(config(gene, "theta", "P", 0, 30, 10000, 9));
  double exact = gene_sensitivity_p(0.25, 30);
  bool est_ok = std::abs(r.estimate + 318.073) <= 3 * r.standard_error() &&
                std::abs(r.estimate - exact) <= 3 * r.standard_error();
  bool ci_ok = r.ci95 >= 49.2 / 2 && r.ci95 <= 49.2 * 2;
  auto mmq = preset("mmq");
  auto tr = variance_trace(Method::kGirsanov, config(mmq, "theta", "M", 0, 40, 10000, 9),
                           {10, 20, 40});
  const auto& v = tr.variance_d;
  double ratio = v[2] / v[1];
  bool trace_ok = v[0] < v[1] && v[1] < v[2] && ratio >= 1.4 && ratio <= 2.8;
  return {est_ok && ci_ok && trace_ok,
          "gene " + num(r.estimate, 5) + " +/- " + num(r.ci95, 3) + "; mmq Var(d) " + num(v[0]) +
              ", " + num(v[1]) + ", " + num(v[2]) + ", ratio 40/20 " + num(ratio, 3)};
}

Outcome c10_work() {
  auto net = preset("gene");
  auto cfd = estimate_fd(Method::kCFD, config(net, "theta", "P", 1.0 / 20, 30, 1000, 10));
  auto cmc = estimate_fd(Method::kCMC, config(net, "theta", "P", 1.0 / 20, 30, 1000, 10));
  double u_cfd = static_cast<double>(cfd.n_updates), u_cmc = static_cast<double>(cmc.n_updates);
  bool ok = u_cfd <= 0.7 * u_cmc && std::abs(u_cfd / 4.4e6 - 1) <= 0.3 &&
            std::abs(u_cmc / 8.4e6 - 1) <= 0.3;
  return {ok, "updates cfd " + num(u_cfd, 3) + ", cmc " + num(u_cmc, 3)};
}

Outcome c11_toggle() {
  auto net = preset("toggle");
  auto c = config(net, "alpha1", "X1", 0.1, 20, 10000, 11);
  auto cfd = variance_trace(Method::kCFD, c, {2, 20});
  auto crp = variance_trace(Method::kCRP, c, {2, 20});
  bool ok = crp.variance_d[0] < cfd.variance_d[0] && cfd.variance_d[1] < crp.variance_d[1];
  return {ok, "t=2: cfd " + num(cfd.variance_d[0]) + " crp " + num(crp.variance_d[0]) +
                  "; t=20: cfd " + num(cfd.variance_d[1]) + " crp " + num(crp.variance_d[1])};
}

bool marginals_preserved(std::string& detail) {
  auto net = preset("gene");
  const double eps = 1.0 / 20;
  const std::size_t n = 10000;
  ParamMap hi = perturb(net.parameters, "theta", eps);
  SimOptions o;
  o.horizon = 30;
  std::vector<double> ref_hi, ref_lo;
  for (std::uint64_t i = 0; i < n; ++i) {
    ref_hi.push_back(static_cast<double>(
        simulate_nrm(net, hi, {0, 0}, o, PathSeeds{SeedPlan{120}, i}).terminal[1]));
    ref_lo.push_back(static_cast<double>(
        simulate_nrm(net, net.parameters, {0, 0}, o, PathSeeds{SeedPlan{121}, i}).terminal[1]));
  }
  Moments rh = moments(ref_hi), rl = moments(ref_lo);
  bool ok = true;
  PairSpec spec = make_pair_spec(net, net.parameters, "theta", eps, {0, 0});
  for (Coupling c : {Coupling::kCFD, Coupling::kCRP, Coupling::kCRN}) {
    std::vector<double> a, b;
    for (std::uint64_t i = 0; i < n; ++i) {
      CoupledPath p = simulate_pair(c, spec, o, PathSeeds{SeedPlan{122}, i});
      a.push_back(static_cast<double>(p.first.terminal[1]));
      b.push_back(static_cast<double>(p.second.terminal[1]));
    }
    Moments ma = moments(a), mb = moments(b);
    double worst = std::max({std::abs(ma.mean - rh.mean) / combined(ma.se_mean, rh.se_mean),
                             std::abs(mb.mean - rl.mean) / combined(mb.se_mean, rl.se_mean),
                             std::abs(ma.var - rh.var) / combined(ma.se_var, rh.se_var),
                             std::abs(mb.var - rl.var) / combined(mb.se_var, rl.se_var)});
    ok = ok && worst <= 4.0;
    detail += to_string(c) + " max|z| " + num(worst, 3) + ", ";
  }
  return ok;
}

bool workers_identical(std::string& detail) {
  auto net = preset("gene");
  bool ok = true;
  for (Method m : {Method::kCMC, Method::kCFD, Method::kCRP, Method::kCRN, Method::kNaive,
                   Method::kGirsanov}) {
    auto c = config(net, "theta", "P", m == Method::kGirsanov ? 0.0 : 0.05, 30, 500, 12);
    std::vector<EstimateReport> reports;
    for (std::size_t w : {1u, 2u, 8u}) {
      c.workers = w;
      reports.push_back(m == Method::kGirsanov ? estimate_girsanov(c) : estimate_fd(m, c));
    }
    for (const auto& r : reports)
      ok = ok && r.estimate == reports[0].estimate &&
           r.sample_variance == reports[0].sample_variance && r.n_updates == reports[0].n_updates;
  }
  detail += std::string("workers {1,2,8} ") + (ok ? "identical" : "DIFFER") + ", ";
  return ok;
}

bool parser_round_trip(std::string& detail) {
  int files = 0;
  bool ok = true;
  for (const auto& entry : std::filesystem::directory_iterator(CTMCSENS_MODELS_DIR)) {
    if (entry.path().extension() != ".net") continue;
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    auto net = parse_model(ss.str());
    auto printed = to_model_text(net);
    ok = ok && parse_model(printed) == net && to_model_text(parse_model(printed)) == printed;
    ++files;
  }
  for (const auto& p : all_presets()) {
    auto net = parse_model(p.model_text);
    ok = ok && parse_model(to_model_text(net)) == net;
  }
  detail += "round trip over " + std::to_string(files) + " model files " + (ok ? "ok" : "FAILED") +
            ", ";
  return ok && files >= 5;
}

bool diff_param_matches_fd(std::string& detail) {
  SplitMix64 rng(12);
  int checked = 0;
  bool ok = true;
  for (const auto& entry : std::filesystem::directory_iterator(CTMCSENS_MODELS_DIR)) {
    if (entry.path().extension() != ".net") continue;
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    auto net = parse_model(ss.str());
    for (const auto& [param, value] : net.parameters) {
      for (std::size_t k = 0; k < net.num_reactions(); ++k) {
        Expr d = diff_param(net.reactions[k].rate, param);
        for (int trial = 0; trial < 10; ++trial) {
          StateVec x(net.num_species());
          for (auto& v : x) v = static_cast<Count>(rng() % 40);
          const double h = 1e-6 * std::max(1.0, std::abs(value));
          double fd = (evaluate(net.reactions[k].rate, x, perturb(net.parameters, param, h)) -
                       evaluate(net.reactions[k].rate, x, perturb(net.parameters, param, -h))) /
                      (2 * h);
          double exact = evaluate(d, x, net.parameters);
          double scale =
              std::max({std::abs(exact), std::abs(evaluate(net.reactions[k].rate, x,
                                                            net.parameters)), 1.0});
          ok = ok && std::abs(exact - fd) <= 1e-5 * scale;
          ++checked;
        }
      }
    }
  }
  detail += "diff_param vs central differences at " + std::to_string(checked) + " points " +
            (ok ? "ok" : "FAILED");
  return ok;
}

Outcome c12_properties() {
  std::string detail;
  bool laws = marginals_preserved(detail);
  bool workers = workers_identical(detail);
  bool parser = parser_round_trip(detail);
  bool diff = diff_param_matches_fd(detail);
  return {laws && workers && parser && diff, detail};
}

}  // namespace

int main(int argc, char** argv) {
  bool slow = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--slow") == 0) slow = true;
  if (const char* env = std::getenv("CTMCSENS_SLOW_TESTS"); env && std::strcmp(env, "1") == 0)
    slow = true;

  const std::vector<Criterion> criteria{
      {1, "exact-value oracle", 1, false, c1_oracle},
      {2, "CFD correctness (gene)", 120, false, c2_cfd_gene},
      {3, "variance ordering (gene)", 180, false, c3_variance_ordering},
      {4, "M/M/inf coupled-moment law", 60, false, c4_coupled_moments},
      {5, "CFD variance limit", 60, false, c5_variance_limit},
      {6, "CRP/CRN decoupling", 1800, true, c6_decoupling},
      {7, "naive coupling regression", 60, false, c7_naive},
      {8, "toy Poisson coupling", 30, false, c8_toy},
      {9, "Girsanov", 120, false, c9_girsanov},
      {10, "work accounting", 60, false, c10_work},
      {11, "toggle-switch crossover", 300, false, c11_toggle},
      {12, "law preservation and determinism", 180, false, c12_properties},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (c.slow && !slow) {
      std::cout << "SKIP " << std::setw(2) << c.id << "  " << c.name
                << ": opt-in, run with --slow or CTMCSENS_SLOW_TESTS=1" << std::endl;
      continue;
    }
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_budget = secs <= c.budget_s;
    bool pass = o.pass && in_budget;
    if (!pass) ++failed;
    std::cout << (pass ? "PASS " : "FAIL ") << std::setw(2) << c.id << "  " << c.name << ": "
              << o.detail << " [" << num(secs, 3) << " s"
              << (in_budget ? "" : ", over the " + num(c.budget_s) + " s budget") << "]"
              << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
