#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctmcsens/model/compiled.hpp"
#include "ctmcsens/model/expr.hpp"
#include "ctmcsens/model/state.hpp"

namespace ctmcsens {

/// Invalid model text or an inconsistent network.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return what;
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << what;
    return os.str();
  }
  int line_;
  int column_;
};

/// A failure while simulating a path (bad propensity, event cap, ...).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Reaction {
  std::map<std::size_t, int> reactants;
  std::map<std::size_t, int> products;
  StateVec zeta;
  Expr rate;

  friend bool operator==(const Reaction&, const Reaction&) = default;
};

struct ReactionNetwork {
  std::string name = "network";
  std::vector<std::string> species;
  std::vector<Reaction> reactions;
  ParamMap parameters;
  StateVec initial;  // defaults to all zeros

  std::size_t num_species() const { return species.size(); }
  std::size_t num_reactions() const { return reactions.size(); }

  std::optional<std::size_t> species_index(const std::string& s) const {
    auto it = std::find(species.begin(), species.end(), s);
    if (it == species.end()) return std::nullopt;
    return static_cast<std::size_t>(it - species.begin());
  }

  /// "reaction 3 (M ->)" style label for diagnostics.
  std::string describe(std::size_t k) const {
    std::ostringstream os;
    os << "reaction " << (k + 1) << " (";
    auto side = [&](const std::map<std::size_t, int>& m) {
      bool first = true;
      for (auto [i, c] : m) {
        if (!first) os << " + ";
        first = false;
        if (c != 1) os << c << " ";
        os << species[i];
      }
    };
    side(reactions[k].reactants);
    os << (reactions[k].reactants.empty() ? "->" : " ->");
    if (!reactions[k].products.empty()) os << " ";
    side(reactions[k].products);
    os << ")";
    return os.str();
  }

  friend bool operator==(const ReactionNetwork&, const ReactionNetwork&) = default;
};

inline void collect_refs(const Expr& e, std::vector<const ExprNode*>& out) {
  if (e.op() == Op::kSpecies || e.op() == Op::kParam) out.push_back(&e.node());
  for (const auto& a : e.node().args) collect_refs(a, out);
}

/// Checks every structural invariant of a network; throws ModelError.
inline void validate(const ReactionNetwork& net) {
  const std::size_t d = net.num_species();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j)
      if (net.species[i] == net.species[j])
        throw ModelError("duplicate species '" + net.species[i] + "'");
    if (net.parameters.count(net.species[i]))
      throw ModelError("name '" + net.species[i] + "' is both a species and a parameter");
  }
  if (net.reactions.empty()) throw ModelError("network has no reactions");
  if (!net.initial.empty()) {
    if (net.initial.size() != d) throw ModelError("initial state has wrong length");
    for (Count c : net.initial)
      if (c < 0) throw ModelError("initial state must be nonnegative");
  }
  for (std::size_t k = 0; k < net.num_reactions(); ++k) {
    const Reaction& r = net.reactions[k];
    if (r.zeta.size() != d) throw ModelError(net.describe(k) + ": zeta has wrong length");
    StateVec expect(d, 0);
    for (auto [i, c] : r.products) expect.at(i) += c;
    for (auto [i, c] : r.reactants) expect.at(i) -= c;
    if (expect != r.zeta) throw ModelError(net.describe(k) + ": zeta != products - reactants");
    if (std::all_of(r.zeta.begin(), r.zeta.end(), [](Count z) { return z == 0; }))
      throw ModelError(net.describe(k) + ": reaction vector is all zero");
    std::vector<const ExprNode*> refs;
    collect_refs(r.rate, refs);
    for (const ExprNode* n : refs) {
      if (n->op == Op::kSpecies) {
        if (n->index >= d || net.species[n->index] != n->name)
          throw ModelError(net.describe(k) + ": unresolved species '" + n->name + "'");
      } else if (!net.parameters.count(n->name)) {
        throw ModelError(net.describe(k) + ": unresolved identifier '" + n->name + "'");
      }
    }
  }
}

/// Copy of `params` with `params[name] += delta`.
inline ParamMap perturb(const ParamMap& params, const std::string& name, double delta) {
  auto it = params.find(name);
  if (it == params.end()) throw ModelError("unknown parameter '" + name + "'");
  ParamMap out = params;
  out[name] = it->second + delta;
  return out;
}

/// Copy of `params` with `params[name] = value`.
inline ParamMap with_param(const ParamMap& params, const std::string& name, double value) {
  if (!params.count(name)) throw ModelError("unknown parameter '" + name + "'");
  ParamMap out = params;
  out[name] = value;
  return out;
}

inline StateVec initial_state(const ReactionNetwork& net) {
  return net.initial.empty() ? StateVec(net.num_species(), 0) : net.initial;
}

/// Propensity of reaction k; negative or non-finite values are errors that
/// name the reaction.
inline double eval_propensity(const ReactionNetwork& net, std::size_t k,
                              std::span<const Count> x, const ParamMap& params) {
  double v = 0.0;
  try {
    v = evaluate(net.reactions.at(k).rate, x, params);
  } catch (const EvalError& e) {
    throw SimulationError(net.describe(k) + ": " + e.what());
  }
  if (v < 0.0) {
    std::ostringstream os;
    os << net.describe(k) << ": negative propensity " << v;
    throw SimulationError(os.str());
  }
  return v;
}

/// All propensities of a network compiled for one parameter set.
class RateTable {
 public:
  RateTable(const ReactionNetwork& net, const ParamMap& params) : net_(&net) {
    programs_.reserve(net.num_reactions());
    for (const auto& r : net.reactions) programs_.emplace_back(r.rate, params);
    zeta_.reserve(net.num_reactions());
    for (const auto& r : net.reactions) zeta_.push_back(r.zeta);
  }

  std::size_t size() const { return programs_.size(); }
  const StateVec& zeta(std::size_t k) const { return zeta_[k]; }
  const ReactionNetwork& network() const { return *net_; }

  double operator()(std::size_t k, std::span<const Count> x) const {
    double v = 0.0;
    try {
      v = programs_[k](x);
    } catch (const EvalError& e) {
      throw SimulationError(net_->describe(k) + ": " + e.what());
    }
    if (v < 0.0) {
      std::ostringstream os;
      os << net_->describe(k) << ": negative propensity " << v;
      throw SimulationError(os.str());
    }
    return v;
  }

  void eval_all(std::span<const Count> x, std::span<double> out) const {
    for (std::size_t k = 0; k < programs_.size(); ++k) out[k] = (*this)(k, x);
  }

  /// x += zeta_k, refusing to leave the nonnegative orthant.
  void apply(std::size_t k, StateVec& x) const {
    const StateVec& z = zeta_[k];
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += z[i];
      if (x[i] < 0)
        throw SimulationError(net_->describe(k) + ": fired with insufficient " +
                              net_->species[i] + " (propensity must vanish at the boundary)");
    }
  }

 private:
  const ReactionNetwork* net_;
  std::vector<CompiledExpr> programs_;
  std::vector<StateVec> zeta_;
};

}  // namespace ctmcsens
