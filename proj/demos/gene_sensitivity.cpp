// d/dtheta E P(30) for the gene network with each estimator, next to the
// value from the first-moment equations.

#include <iomanip>
#include <iostream>

#include "ctmcsens/ctmcsens.hpp"

int main(int argc, char** argv) {
  using namespace ctmcsens;
  const std::size_t paths = argc > 1 ? std::stoul(argv[1]) : 2000;

  auto preset = *find_preset("gene");
  ReactionNetwork net = parse_model(preset.model_text);
  StateVec x0 = initial_state(net);
  double exact = mean_sensitivity_ode(net, net.parameters, "theta", x0, preset.horizon)[1];

  EstimatorConfig c;
  c.net = &net;
  c.param = "theta";
  c.epsilon = preset.epsilon;
  c.observable = parse_observable("P", net);
  c.horizon = preset.horizon;
  c.paths = paths;
  c.seeds = SeedPlan{42};

  std::cout << "exact: " << std::fixed << std::setprecision(3) << exact << "\n\n";
  std::cout << std::left << std::setw(10) << "method" << std::right << std::setw(12) << "estimate"
            << std::setw(10) << "ci95" << std::setw(14) << "updates" << std::setw(10) << "secs"
            << "\n";
  for (Method m : {Method::kCMC, Method::kCRP, Method::kCRN, Method::kCFD, Method::kGirsanov}) {
    EstimateReport r = m == Method::kGirsanov ? estimate_girsanov(c) : estimate_fd(m, c);
    std::cout << std::left << std::setw(10) << to_string(m) << std::right << std::setw(12)
              << std::setprecision(1) << r.estimate << std::setw(10) << r.ci95 << std::setw(14)
              << r.n_updates << std::setw(10) << std::setprecision(2) << r.elapsed_s << "\n";
  }
}
