#pragma once

// Bundled benchmark models with their default experiment settings.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctmcsens/model/parser.hpp"
#include "ctmcsens/oracle/uniformization.hpp"

namespace ctmcsens {

struct BenchmarkPreset {
  std::string name;
  std::string model_text;
  std::string param;
  double epsilon = 0.0;
  double horizon = 0.0;
  std::size_t paths = 0;
  std::string observable;
  /// Truncation box for the uniformization oracle.
  Box box;
};

namespace detail {

inline constexpr std::string_view kGeneModel = R"(network gene
# mRNA transcription (constant, single gene copy), translation, degradation
species: M P
params: theta=0.25
init: M=0 P=0
reaction: -> M ; rate = 2
reaction: M -> M + P ; rate = mass_action(10)
reaction: M -> ; rate = theta*M
reaction: P -> ; rate = mass_action(1)
)";

inline constexpr std::string_view kMmqModel = R"(network mmq
# M/M/infinity queue, arrival rate perturbed
species: M
params: theta=2
init: M=0
reaction: -> M ; rate = theta
reaction: M -> ; rate = 0.1*M
)";

inline constexpr std::string_view kMmqDeathModel = R"(network mmq_death
# M/M/infinity queue, service rate perturbed
species: M
params: theta=0.1
init: M=0
reaction: -> M ; rate = 2
reaction: M -> ; rate = theta*M
)";

inline constexpr std::string_view kToggleModel = R"(network toggle
# genetic toggle switch with Hill repression
species: X1 X2
params: alpha1=50 alpha2=16 beta=2.5 gamma=1
init: X1=0 X2=0
reaction: -> X1 ; rate = alpha1/(1 + X2^beta)
reaction: X1 -> ; rate = X1
reaction: -> X2 ; rate = alpha2/(1 + X1^gamma)
reaction: X2 -> ; rate = X2
)";

inline constexpr std::string_view kPureDeathModel = R"(network puredeath
species: X
params: theta=1
init: X=1
reaction: X -> ; rate = theta*X
)";

}  // namespace detail

inline std::vector<BenchmarkPreset> all_presets() {
  return {
      {"gene", std::string(detail::kGeneModel), "theta", 1.0 / 20, 30.0, 10000, "P",
       {{0, 40}, {0, 400}}},
      {"mmq", std::string(detail::kMmqModel), "theta", 1.0 / 100, 100.0, 1000, "M", {{0, 120}}},
      {"mmq-death", std::string(detail::kMmqDeathModel), "theta", 1.0 / 100, 100.0, 1000, "M",
       {{0, 120}}},
      {"toggle", std::string(detail::kToggleModel), "alpha1", 1.0 / 10, 40.0, 10000, "X1",
       {{0, 150}, {0, 80}}},
      {"puredeath", std::string(detail::kPureDeathModel), "theta", 0.5, 1.0, 100000, "X",
       {{0, 1}}},
  };
}

inline std::optional<BenchmarkPreset> find_preset(std::string_view name) {
  for (auto& p : all_presets())
    if (p.name == name) return p;
  return std::nullopt;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (auto& p : all_presets()) out.push_back(p.name);
  return out;
}

}  // namespace ctmcsens
