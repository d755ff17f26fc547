#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctmcsens/model/compiled.hpp"
#include "ctmcsens/model/expr.hpp"
#include "ctmcsens/model/network.hpp"
#include "ctmcsens/model/parser.hpp"
#include "ctmcsens/presets.hpp"
#include "ctmcsens/streams/rng.hpp"

using namespace ctmcsens;

namespace {

const char* kHeader = "network t\nspecies: M\nparams: theta=0.25\n";

ReactionNetwork symbols_net() {
  return parse_model(
      "network symbols\n"
      "species: a b c d X1 X2\n"
      "params: alpha1=50 beta=2.5 theta=0.25 k=3\n"
      "reaction: a -> ; rate = 1\n");
}

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Parser, DegradationReaction) {
  auto net = parse_model(std::string(kHeader) + "reaction: M -> ; rate = theta*M\n");
  ASSERT_EQ(net.num_reactions(), 1u);
  EXPECT_EQ(net.reactions[0].zeta, StateVec{-1});
  EXPECT_EQ(to_sexpr(net.reactions[0].rate), "(* theta M)");
  StateVec x{4};
  EXPECT_DOUBLE_EQ(eval_propensity(net, 0, x, net.parameters), 1.0);
}

TEST(Parser, ConstantBirth) {
  auto net = parse_model(std::string(kHeader) + "reaction: -> M ; rate = 2\n");
  EXPECT_EQ(net.reactions[0].zeta, StateVec{1});
  for (Count m : {0, 5, 100}) {
    StateVec x{m};
    EXPECT_DOUBLE_EQ(eval_propensity(net, 0, x, net.parameters), 2.0);
  }
}

TEST(Parser, SyntaxErrorPointsAtToken) {
  std::string line = "reaction: M -> ; rate = *M";
  try {
    parse_model(std::string(kHeader) + line + "\n");
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_EQ(e.column(), static_cast<int>(line.find('*')) + 1);
    EXPECT_NE(std::string(e.what()).find("syntax error at '*'"), std::string::npos) << e.what();
  }
}

TEST(Parser, Errors) {
  auto fails_with = [](const std::string& text, const std::string& fragment) {
    try {
      parse_model(text);
    } catch (const ModelError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos)
          << "message: " << e.what();
      return;
    }
    ADD_FAILURE() << "accepted: " << text;
  };
  fails_with(std::string(kHeader) + "reaction: M -> ; rate = kappa*M\n",
             "unresolved identifier 'kappa'");
  fails_with(std::string(kHeader) + "reaction: Q -> ; rate = 1\n", "unresolved");
  fails_with("network t\nspecies: M M\nreaction: M -> ; rate = 1\n", "duplicate species");
  fails_with(std::string(kHeader) + "reaction: M -> M ; rate = 1\n", "all zero");
  fails_with("species: M\nreaction: M -> ; rate = 1\n", "syntax error");
  fails_with("network t\nspecies: M\nparams: M=1\nreaction: M -> ; rate = 1\n",
             "both a species and a parameter");
  fails_with("network t\nspecies: M\n", "no reactions");
  fails_with(std::string(kHeader) + "reaction: M -> ; rate = (theta*M\n", "syntax error");
  fails_with(std::string(kHeader) + "reaction: M -> ; rate = theta*M extra\n", "syntax error");
  fails_with(std::string(kHeader) + "bogus: M\n", "unknown line keyword");
  fails_with("", "empty model");
}

TEST(Parser, PrecedenceGoldens) {
  auto net = symbols_net();
  auto s = [&](const char* text) { return to_sexpr(parse_observable(text, net)); };
  EXPECT_EQ(s("a+b*c^d"), "(+ a (* b (^ c d)))");
  EXPECT_EQ(s("a-b-c"), "(- (- a b) c)");
  EXPECT_EQ(s("a/b*c"), "(* (/ a b) c)");
  EXPECT_EQ(s("a^b^c"), "(^ a (^ b c))");
  EXPECT_EQ(s("-a^2"), "(neg (^ a 2))");
  EXPECT_EQ(s("(a+b)*c"), "(* (+ a b) c)");
  EXPECT_EQ(s("alpha1/(1 + X2^beta)"), "(/ alpha1 (+ 1 (^ X2 beta)))");
}

TEST(Parser, PrintReparsesToSameTree) {
  auto net = symbols_net();
  for (const char* text : {"a+b*c^d", "a-(b-c)", "a/(b*c)", "(a^b)^c", "-(a+b)", "2^-1",
                           "a - -3", "log(a + 1)*k", "alpha1/(1 + X2^beta)", "-a^2",
                           "(-2)^a", "a*(b/c)", "1e-3*a"}) {
    Expr e = parse_observable(text, net);
    Expr again = parse_observable(to_string(e), net);
    EXPECT_EQ(to_sexpr(e), to_sexpr(again)) << text << " printed as " << to_string(e);
  }
}

TEST(Parser, RoundTripOverModelCorpus) {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(CTMCSENS_MODELS_DIR)) {
    if (entry.path().extension() != ".net") continue;
    ++seen;
    SCOPED_TRACE(entry.path().string());
    ReactionNetwork net = parse_model(read(entry.path()));
    std::string printed = to_model_text(net);
    ReactionNetwork again = parse_model(printed);
    EXPECT_EQ(net, again) << printed;
    EXPECT_EQ(printed, to_model_text(again));
  }
  EXPECT_GE(seen, 5);
}

TEST(Parser, CorpusMatchesEmbeddedPresets) {
  for (const auto& p : all_presets()) {
    std::string file = p.name == "mmq-death" ? "mmq_death" : p.name;
    auto path = std::filesystem::path(CTMCSENS_MODELS_DIR) / (file + ".net");
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
    EXPECT_EQ(parse_model(read(path)), parse_model(p.model_text)) << p.name;
  }
}

TEST(Parser, MassActionOnlyInRates) {
  auto net = symbols_net();
  EXPECT_THROW(parse_observable("mass_action(2)", net), ModelError);
}

TEST(Parser, CoefficientsAndInitialState) {
  auto net = parse_model(
      "network dimer\nspecies: A B\nparams: k=0.5\ninit: A=10\n"
      "reaction: 2 A -> B ; rate = mass_action(k)\n");
  EXPECT_EQ(net.initial, (StateVec{10, 0}));
  EXPECT_EQ(net.reactions[0].zeta, (StateVec{-2, 1}));
  EXPECT_EQ(net.reactions[0].reactants.at(0), 2);
}

TEST(Propensity, Examples) {
  auto mmq = parse_model("network q\nspecies: M\nreaction: M -> ; rate = mass_action(0.1)\n");
  StateVec seven{7};
  EXPECT_NEAR(eval_propensity(mmq, 0, seven, mmq.parameters), 0.7, 1e-15);

  auto toggle = parse_model(find_preset("toggle")->model_text);
  StateVec origin{0, 0};
  EXPECT_DOUBLE_EQ(eval_propensity(toggle, 0, origin, toggle.parameters), 50.0);

  auto dimer = parse_model(
      "network d\nspecies: A\nparams: c=3\nreaction: 2 A -> ; rate = mass_action(c)\n");
  StateVec one{1};
  EXPECT_EQ(eval_propensity(dimer, 0, one, dimer.parameters), 0.0);
}

TEST(Propensity, MassActionBruteForce) {
  auto net = parse_model(
      "network ma\nspecies: A B C\nparams: c=0.3\n"
      "reaction: 2 A + B -> C ; rate = mass_action(c)\n"
      "reaction: 3 C -> A ; rate = mass_action(1.5)\n");
  for (Count a = 0; a <= 6; ++a)
    for (Count b = 0; b <= 6; ++b)
      for (Count c = 0; c <= 6; ++c) {
        StateVec x{a, b, c};
        double r0 = 0.3 * static_cast<double>(a * (a - 1) * b);
        double r1 = 1.5 * static_cast<double>(c * (c - 1) * (c - 2));
        EXPECT_NEAR(eval_propensity(net, 0, x, net.parameters), r0, 1e-12);
        EXPECT_NEAR(eval_propensity(net, 1, x, net.parameters), r1, 1e-12);
        RateTable table(net, net.parameters);
        EXPECT_NEAR(table(0, x), r0, 1e-12);
        EXPECT_NEAR(table(1, x), r1, 1e-12);
      }
}

TEST(Propensity, ErrorsNameTheReaction) {
  auto net = parse_model(
      "network bad\nspecies: A\nparams: k=1\n"
      "reaction: -> A ; rate = 1 - A\n"
      "reaction: A -> ; rate = k/(A - 2)\n"
      "reaction: A -> ; rate = (A - 5)^0.5\n");
  StateVec x{3};
  try {
    eval_propensity(net, 0, x, net.parameters);
    FAIL();
  } catch (const SimulationError& e) {
    EXPECT_NE(std::string(e.what()).find("reaction 1 (-> A)"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("negative propensity"), std::string::npos);
  }
  StateVec two{2};
  EXPECT_THROW(eval_propensity(net, 1, two, net.parameters), SimulationError);
  EXPECT_THROW(eval_propensity(net, 2, x, net.parameters), SimulationError);
  RateTable table(net, net.parameters);
  EXPECT_THROW(table(0, x), SimulationError);
  EXPECT_THROW(table(1, two), SimulationError);
}

TEST(Propensity, NonFiniteIsAnError) {
  auto net = parse_model(
      "network big\nspecies: A\nreaction: -> A ; rate = 10^400\n");
  StateVec x{0};
  EXPECT_THROW(eval_propensity(net, 0, x, net.parameters), SimulationError);
}

TEST(Propensity, CompiledMatchesTreeEvaluation) {
  auto net = symbols_net();
  SplitMix64 rng(3);
  for (const char* text : {"a+b*c^d", "alpha1/(1 + X2^beta)", "log(a+1)*theta - b/(c+1)",
                           "-(a + 2*b)^2 + k", "2^-1*a"}) {
    Expr e = parse_observable(text, net);
    CompiledExpr c(e, net.parameters);
    for (int i = 0; i < 50; ++i) {
      StateVec x(6);
      for (auto& v : x) v = static_cast<Count>(rng() % 9);
      EXPECT_DOUBLE_EQ(c(x), evaluate(e, x, net.parameters)) << text;
    }
  }
}

TEST(RateTableTest, ApplyRefusesNegativeState) {
  auto net = parse_model("network n\nspecies: A\nreaction: A -> ; rate = 1\n");
  RateTable table(net, net.parameters);
  StateVec x{0};
  EXPECT_THROW(table.apply(0, x), SimulationError);
}

TEST(DiffParam, Examples) {
  auto net = symbols_net();
  EXPECT_EQ(to_string(diff_param(parse_observable("theta*X1", net), "theta")), "X1");
  Expr hill = parse_observable("alpha1/(1 + X2^beta)", net);
  EXPECT_EQ(to_string(diff_param(hill, "alpha1")), "1/(1 + X2^beta)");
  EXPECT_TRUE(diff_param(parse_observable("a*b + k", net), "theta").is_zero());
  EXPECT_TRUE(diff_param(hill, "theta").is_zero());
}

TEST(DiffParam, MatchesCentralDifferences) {
  auto net = symbols_net();
  const std::vector<std::string> exprs{
      "theta*X1",
      "alpha1/(1 + X2^beta)",
      "alpha1/(1 + (X2 + 1)^beta)",
      "k*theta^2*a - b/(theta + 1)",
      "(a + 1)^(theta*k)",
      "log(theta*(b + 1))*c",
      "-(theta + k)^3 + theta/(a + theta)",
      "alpha1*beta/(k + theta*d)"};
  SplitMix64 rng(20240611);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::string& text = exprs[static_cast<std::size_t>(trial) % exprs.size()];
    Expr e = parse_observable(text, net);
    StateVec x(6);
    for (auto& v : x) v = static_cast<Count>(rng() % 12);
    ParamMap p = net.parameters;
    p["theta"] = 0.1 + 2.0 * rng.uniform();
    p["k"] = 0.5 + 3.0 * rng.uniform();
    p["beta"] = 0.5 + 2.5 * rng.uniform();
    p["alpha1"] = 1.0 + 50.0 * rng.uniform();
    const std::string param = trial % 3 == 0 ? "k" : trial % 3 == 1 ? "theta" : "beta";
    Expr d = diff_param(e, param);
    const double h = 1e-6;
    double fd = (evaluate(e, x, perturb(p, param, h)) - evaluate(e, x, perturb(p, param, -h))) /
                (2 * h);
    double exact = evaluate(d, x, p);
    double scale = std::max({std::abs(exact), std::abs(evaluate(e, x, p)), 1.0});
    EXPECT_NEAR(exact, fd, 1e-6 * scale) << text << " d/d" << param;
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(DiffParam, MassActionRateConstant) {
  auto net = parse_model(
      "network ma\nspecies: A\nparams: c=2\nreaction: 2 A -> ; rate = mass_action(c^2)\n");
  Expr d = diff_param(net.reactions[0].rate, "c");
  StateVec x{5};
  EXPECT_DOUBLE_EQ(evaluate(d, x, net.parameters), 2 * 2.0 * 5 * 4);
}

TEST(Perturb, Examples) {
  ParamMap p{{"theta", 0.25}};
  ParamMap q = perturb(p, "theta", 0.025);
  EXPECT_DOUBLE_EQ(q.at("theta"), 0.275);
  EXPECT_DOUBLE_EQ(p.at("theta"), 0.25);
  EXPECT_EQ(perturb(ParamMap{{"theta", 2.0}}, "theta", 0.0), (ParamMap{{"theta", 2.0}}));
  EXPECT_DOUBLE_EQ(perturb(ParamMap{{"theta", 1.0}}, "theta", -0.005).at("theta"), 0.995);
  EXPECT_THROW(perturb(p, "gamma", 1.0), ModelError);
}

TEST(Network, ValidateRejectsInconsistentZeta) {
  auto net = parse_model(std::string(kHeader) + "reaction: M -> ; rate = theta*M\n");
  net.reactions[0].zeta = {1};
  EXPECT_THROW(validate(net), ModelError);
}

TEST(Network, PresetsParseAndDescribe) {
  for (const auto& p : all_presets()) {
    auto net = parse_model(p.model_text);
    EXPECT_TRUE(net.parameters.count(p.param)) << p.name;
    EXPECT_NO_THROW(parse_observable(p.observable, net));
    EXPECT_EQ(p.box.size(), net.num_species());
  }
  auto gene = parse_model(find_preset("gene")->model_text);
  EXPECT_EQ(gene.describe(1), "reaction 2 (M -> M + P)");
}
