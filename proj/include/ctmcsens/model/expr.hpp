#pragma once

// Propensity expression AST: construction, evaluation, symbolic
// differentiation with respect to a parameter, and printing.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ctmcsens/model/state.hpp"

namespace ctmcsens {

/// Raised when an expression cannot be evaluated to a finite real.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Op : std::uint8_t {
  kConst,
  kSpecies,
  kParam,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kNeg,
  kLog,
  // u^v * log(u), continuous at u = 0 (value 0); produced only by diff_param.
  kPowLog,
  // c * prod_i x_i (x_i - 1) ... (x_i - nu_i + 1) over the reactant multiset.
  kMassAction,
};

struct Reactant {
  std::size_t species = 0;
  int coefficient = 1;
  friend bool operator==(const Reactant&, const Reactant&) = default;
};

class Expr;

struct ExprNode {
  Op op = Op::kConst;
  double value = 0.0;      // kConst
  std::size_t index = 0;   // kSpecies
  std::string name;        // kSpecies, kParam
  std::vector<Expr> args;  // operators; kMassAction has one arg (the rate constant)
  std::vector<Reactant> reactants;  // kMassAction
};

/// Immutable, cheaply copyable handle to an expression tree.
class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double v) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::kConst;
    n->value = v;
    return Expr(std::move(n));
  }
  static Expr species(std::size_t index, std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::kSpecies;
    n->index = index;
    n->name = std::move(name);
    return Expr(std::move(n));
  }
  static Expr param(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::kParam;
    n->name = std::move(name);
    return Expr(std::move(n));
  }
  static Expr unary(Op op, Expr a) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->args = {std::move(a)};
    return Expr(std::move(n));
  }
  static Expr binary(Op op, Expr a, Expr b) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return Expr(std::move(n));
  }
  static Expr mass_action(Expr rate_constant, std::vector<Reactant> reactants) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::kMassAction;
    n->args = {std::move(rate_constant)};
    n->reactants = std::move(reactants);
    return Expr(std::move(n));
  }

  const ExprNode& node() const { return *node_; }
  Op op() const { return node_->op; }
  const Expr& arg(std::size_t i) const { return node_->args.at(i); }

  bool is_const(double v) const { return op() == Op::kConst && node_->value == v; }
  bool is_zero() const { return is_const(0.0); }

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    const ExprNode& x = *a.node_;
    const ExprNode& y = *b.node_;
    if (x.op != y.op) return false;
    switch (x.op) {
      case Op::kConst:
        return x.value == y.value;
      case Op::kSpecies:
        return x.index == y.index && x.name == y.name;
      case Op::kParam:
        return x.name == y.name;
      case Op::kMassAction:
        if (x.reactants != y.reactants) return false;
        break;
      default:
        break;
    }
    return x.args == y.args;
  }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const ExprNode> node_;
};

using ParamMap = std::map<std::string, double>;

// Simplifying constructors. They fold constants and drop identities so that
// derivatives come out in the shape a person would write them.
inline Expr add(Expr a, Expr b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.op() == Op::kConst && b.op() == Op::kConst)
    return Expr::constant(a.node().value + b.node().value);
  return Expr::binary(Op::kAdd, std::move(a), std::move(b));
}
inline Expr neg(Expr a) {
  if (a.op() == Op::kConst) return Expr::constant(-a.node().value);
  if (a.op() == Op::kNeg) return a.arg(0);
  return Expr::unary(Op::kNeg, std::move(a));
}
inline Expr sub(Expr a, Expr b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return neg(std::move(b));
  if (a.op() == Op::kConst && b.op() == Op::kConst)
    return Expr::constant(a.node().value - b.node().value);
  return Expr::binary(Op::kSub, std::move(a), std::move(b));
}
inline Expr mul(Expr a, Expr b) {
  if (a.is_zero() || b.is_zero()) return Expr::constant(0.0);
  if (a.is_const(1.0)) return b;
  if (b.is_const(1.0)) return a;
  if (a.op() == Op::kConst && b.op() == Op::kConst)
    return Expr::constant(a.node().value * b.node().value);
  return Expr::binary(Op::kMul, std::move(a), std::move(b));
}
inline Expr div(Expr a, Expr b) {
  if (a.is_zero()) return Expr::constant(0.0);
  if (b.is_const(1.0)) return a;
  return Expr::binary(Op::kDiv, std::move(a), std::move(b));
}
inline Expr pow(Expr a, Expr b) {
  if (b.is_zero()) return Expr::constant(1.0);
  if (b.is_const(1.0)) return a;
  return Expr::binary(Op::kPow, std::move(a), std::move(b));
}

/// True when `e` mentions parameter `name` anywhere.
inline bool depends_on(const Expr& e, const std::string& name) {
  if (e.op() == Op::kParam) return e.node().name == name;
  for (const auto& a : e.node().args)
    if (depends_on(a, name)) return true;
  return false;
}

/// Falling factorial x (x-1) ... (x-n+1); zero when x < n.
inline double falling_factorial(Count x, int n) {
  if (x < n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= static_cast<double>(x - i);
  return r;
}

inline double pow_checked(double base, double exponent) {
  if (base < 0.0) {
    std::ostringstream os;
    os << "pow with negative base " << base;
    throw EvalError(os.str());
  }
  return std::pow(base, exponent);
}

/// Evaluates `e` at species counts `x` with parameter values `params`.
/// Throws EvalError on division by zero, a negative pow base, an unknown
/// parameter, or a non-finite result.
inline double evaluate(const Expr& e, std::span<const Count> x, const ParamMap& params) {
  const ExprNode& n = e.node();
  auto sub_eval = [&](std::size_t i) { return evaluate(n.args[i], x, params); };
  double r = 0.0;
  switch (n.op) {
    case Op::kConst:
      r = n.value;
      break;
    case Op::kSpecies:
      if (n.index >= x.size()) throw EvalError("species index out of range: " + n.name);
      r = static_cast<double>(x[n.index]);
      break;
    case Op::kParam: {
      auto it = params.find(n.name);
      if (it == params.end()) throw EvalError("unknown parameter: " + n.name);
      r = it->second;
      break;
    }
    case Op::kAdd:
      r = sub_eval(0) + sub_eval(1);
      break;
    case Op::kSub:
      r = sub_eval(0) - sub_eval(1);
      break;
    case Op::kMul:
      r = sub_eval(0) * sub_eval(1);
      break;
    case Op::kDiv: {
      double den = sub_eval(1);
      if (den == 0.0) throw EvalError("division by zero");
      r = sub_eval(0) / den;
      break;
    }
    case Op::kPow:
      r = pow_checked(sub_eval(0), sub_eval(1));
      break;
    case Op::kNeg:
      r = -sub_eval(0);
      break;
    case Op::kLog: {
      double a = sub_eval(0);
      if (a <= 0.0) throw EvalError("log of non-positive value");
      r = std::log(a);
      break;
    }
    case Op::kPowLog: {
      double u = sub_eval(0);
      double v = sub_eval(1);
      if (u < 0.0) throw EvalError("pow with negative base");
      r = (u == 0.0) ? 0.0 : std::pow(u, v) * std::log(u);
      break;
    }
    case Op::kMassAction: {
      r = sub_eval(0);
      for (const auto& re : n.reactants) {
        if (re.species >= x.size()) throw EvalError("species index out of range");
        r *= falling_factorial(x[re.species], re.coefficient);
      }
      break;
    }
  }
  if (!std::isfinite(r)) throw EvalError("non-finite result");
  return r;
}

/// Exact symbolic partial derivative of `e` with respect to parameter `name`.
inline Expr diff_param(const Expr& e, const std::string& name) {
  const ExprNode& n = e.node();
  switch (n.op) {
    case Op::kConst:
    case Op::kSpecies:
      return Expr::constant(0.0);
    case Op::kParam:
      return Expr::constant(n.name == name ? 1.0 : 0.0);
    case Op::kAdd:
      return add(diff_param(n.args[0], name), diff_param(n.args[1], name));
    case Op::kSub:
      return sub(diff_param(n.args[0], name), diff_param(n.args[1], name));
    case Op::kNeg:
      return neg(diff_param(n.args[0], name));
    case Op::kMul: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      return add(mul(diff_param(a, name), b), mul(a, diff_param(b, name)));
    }
    case Op::kDiv: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      Expr da = diff_param(a, name);
      Expr db = diff_param(b, name);
      if (db.is_zero()) return div(da, b);
      return div(sub(mul(da, b), mul(a, db)), mul(b, b));
    }
    case Op::kPow: {
      const Expr& u = n.args[0];
      const Expr& v = n.args[1];
      Expr du = diff_param(u, name);
      Expr dv = diff_param(v, name);
      Expr out = Expr::constant(0.0);
      if (!du.is_zero()) out = mul(mul(v, pow(u, sub(v, Expr::constant(1.0)))), du);
      if (!dv.is_zero()) out = add(out, mul(Expr::binary(Op::kPowLog, u, v), dv));
      return out;
    }
    case Op::kLog:
      return div(diff_param(n.args[0], name), n.args[0]);
    case Op::kPowLog: {
      // u' (v u^(v-1) log u + u^(v-1)) + v' u^v (log u)^2
      const Expr& u = n.args[0];
      const Expr& v = n.args[1];
      Expr du = diff_param(u, name);
      Expr dv = diff_param(v, name);
      if (du.is_zero() && dv.is_zero()) return Expr::constant(0.0);
      Expr lg = Expr::unary(Op::kLog, u);
      Expr term_u = mul(du, add(mul(mul(v, pow(u, sub(v, Expr::constant(1.0)))), lg),
                                pow(u, sub(v, Expr::constant(1.0)))));
      Expr term_v = mul(dv, mul(Expr::binary(Op::kPowLog, u, v), lg));
      return add(term_u, term_v);
    }
    case Op::kMassAction:
      return Expr::mass_action(diff_param(n.args[0], name), n.reactants);
  }
  return Expr::constant(0.0);
}

namespace detail {

inline int precedence(Op op) {
  switch (op) {
    case Op::kAdd:
    case Op::kSub:
      return 1;
    case Op::kMul:
    case Op::kDiv:
      return 2;
    case Op::kNeg:
      return 3;
    case Op::kPow:
      return 4;
    default:
      return 5;
  }
}

inline std::string format_number(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void print(std::ostream& os, const Expr& e, int parent_prec, bool right_operand);

inline void print_child(std::ostream& os, const Expr& e, int prec, bool right) {
  print(os, e, prec, right);
}

inline void print(std::ostream& os, const Expr& e, int parent_prec, bool right_operand) {
  const ExprNode& n = e.node();
  int prec = precedence(n.op);
  bool paren = prec < parent_prec || (prec == parent_prec && right_operand);
  switch (n.op) {
    case Op::kConst:
      if (n.value < 0.0)
        os << "(-" << format_number(-n.value) << ")";
      else
        os << format_number(n.value);
      return;
    case Op::kSpecies:
    case Op::kParam:
      os << n.name;
      return;
    case Op::kLog:
      os << "log(";
      print(os, n.args[0], 0, false);
      os << ")";
      return;
    case Op::kPowLog:
      os << "(";
      print(os, n.args[0], 5, false);
      os << "^";
      print(os, n.args[1], 4, false);
      os << "*log(";
      print(os, n.args[0], 0, false);
      os << "))";
      return;
    case Op::kMassAction:
      os << "mass_action(";
      print(os, n.args[0], 0, false);
      os << ")";
      return;
    default:
      break;
  }
  if (n.op == Op::kPow) {
    // Right associative: parenthesise a pow on the left, not on the right.
    paren = prec < parent_prec || (prec == parent_prec && !right_operand);
  }
  if (paren) os << "(";
  switch (n.op) {
    case Op::kNeg:
      os << "-";
      if (n.args[0].op() == Op::kConst && n.args[0].node().value >= 0.0) {
        // "-3" would reparse as the literal -3.
        os << "(" << format_number(n.args[0].node().value) << ")";
      } else {
        print_child(os, n.args[0], prec, false);
      }
      break;
    case Op::kPow:
      print_child(os, n.args[0], prec + 1, false);
      os << "^";
      print_child(os, n.args[1], prec, true);
      break;
    default: {
      const char* sym = n.op == Op::kAdd   ? " + "
                        : n.op == Op::kSub ? " - "
                        : n.op == Op::kMul ? "*"
                                           : "/";
      print_child(os, n.args[0], prec, false);
      os << sym;
      print_child(os, n.args[1], prec, true);
      break;
    }
  }
  if (paren) os << ")";
}

inline void print_sexpr(std::ostream& os, const Expr& e) {
  const ExprNode& n = e.node();
  switch (n.op) {
    case Op::kConst:
      os << format_number(n.value);
      return;
    case Op::kSpecies:
    case Op::kParam:
      os << n.name;
      return;
    default:
      break;
  }
  static constexpr const char* kNames[] = {"const", "species", "param", "+", "-", "*",
                                           "/",     "^",       "neg",   "log", "powlog",
                                           "mass_action"};
  os << "(" << kNames[static_cast<int>(n.op)];
  for (const auto& a : n.args) {
    os << " ";
    print_sexpr(os, a);
  }
  for (const auto& r : n.reactants) os << " #" << r.species << ":" << r.coefficient;
  os << ")";
}

}  // namespace detail

/// Infix rendering that reparses to the same tree.
inline std::string to_string(const Expr& e) {
  std::ostringstream os;
  detail::print(os, e, 0, false);
  return os.str();
}

/// Prefix rendering used for AST golden tests, e.g. "(+ a (* b (^ c d)))".
inline std::string to_sexpr(const Expr& e) {
  std::ostringstream os;
  detail::print_sexpr(os, e);
  return os.str();
}

}  // namespace ctmcsens
