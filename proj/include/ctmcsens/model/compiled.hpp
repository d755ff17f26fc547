#pragma once

// Flat postfix programs for the simulation hot loop. Parameters are bound to
// constants at compile time, so one program serves one parameter set.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ctmcsens/model/expr.hpp"

namespace ctmcsens {

class CompiledExpr {
 public:
  CompiledExpr() { code_.push_back({Code::kConst, 0.0, 0, 0}); }

  CompiledExpr(const Expr& e, const ParamMap& params) {
    emit(e, params);
    depth_ = max_depth(e);
    if (depth_ > kMaxStack) throw EvalError("expression nesting too deep to compile");
  }

  /// Same semantics and error behaviour as evaluate().
  double operator()(std::span<const Count> x) const {
    std::array<double, kMaxStack> stack;
    std::size_t sp = 0;
    for (const Instr& in : code_) {
      switch (in.code) {
        case Code::kConst:
          stack[sp++] = in.value;
          break;
        case Code::kSpecies:
          stack[sp++] = static_cast<double>(x[in.index]);
          break;
        case Code::kAdd:
          --sp;
          stack[sp - 1] += stack[sp];
          break;
        case Code::kSub:
          --sp;
          stack[sp - 1] -= stack[sp];
          break;
        case Code::kMul:
          --sp;
          stack[sp - 1] *= stack[sp];
          break;
        case Code::kDiv:
          --sp;
          if (stack[sp] == 0.0) throw EvalError("division by zero");
          stack[sp - 1] /= stack[sp];
          break;
        case Code::kPow:
          --sp;
          stack[sp - 1] = pow_checked(stack[sp - 1], stack[sp]);
          break;
        case Code::kNeg:
          stack[sp - 1] = -stack[sp - 1];
          break;
        case Code::kLog:
          if (stack[sp - 1] <= 0.0) throw EvalError("log of non-positive value");
          stack[sp - 1] = std::log(stack[sp - 1]);
          break;
        case Code::kPowLog: {
          --sp;
          double u = stack[sp - 1];
          if (u < 0.0) throw EvalError("pow with negative base");
          stack[sp - 1] = (u == 0.0) ? 0.0 : std::pow(u, stack[sp]) * std::log(u);
          break;
        }
        case Code::kFalling:
          stack[sp - 1] *= falling_factorial(x[in.index], in.count);
          break;
      }
    }
    double r = stack[0];
    if (!std::isfinite(r)) throw EvalError("non-finite result");
    return r;
  }

 private:
  static constexpr std::size_t kMaxStack = 64;

  enum class Code : std::uint8_t {
    kConst,
    kSpecies,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kPow,
    kNeg,
    kLog,
    kPowLog,
    kFalling,
  };
  struct Instr {
    Code code;
    double value;
    std::size_t index;
    int count;
  };

  static std::size_t max_depth(const Expr& e) {
    std::size_t d = 0;
    const auto& args = e.node().args;
    for (std::size_t i = 0; i < args.size(); ++i) d = std::max(d, i + max_depth(args[i]));
    return std::max<std::size_t>(d, 1);
  }

  void emit(const Expr& e, const ParamMap& params) {
    const ExprNode& n = e.node();
    switch (n.op) {
      case Op::kConst:
        code_.push_back({Code::kConst, n.value, 0, 0});
        return;
      case Op::kSpecies:
        code_.push_back({Code::kSpecies, 0.0, n.index, 0});
        return;
      case Op::kParam: {
        auto it = params.find(n.name);
        if (it == params.end()) throw EvalError("unknown parameter: " + n.name);
        code_.push_back({Code::kConst, it->second, 0, 0});
        return;
      }
      case Op::kMassAction:
        emit(n.args[0], params);
        for (const auto& r : n.reactants)
          code_.push_back({Code::kFalling, 0.0, r.species, r.coefficient});
        return;
      default:
        break;
    }
    for (const auto& a : n.args) emit(a, params);
    Code c = Code::kAdd;
    switch (n.op) {
      case Op::kAdd: c = Code::kAdd; break;
      case Op::kSub: c = Code::kSub; break;
      case Op::kMul: c = Code::kMul; break;
      case Op::kDiv: c = Code::kDiv; break;
      case Op::kPow: c = Code::kPow; break;
      case Op::kNeg: c = Code::kNeg; break;
      case Op::kLog: c = Code::kLog; break;
      case Op::kPowLog: c = Code::kPowLog; break;
      default: break;
    }
    code_.push_back({c, 0.0, 0, 0});
  }

  std::vector<Instr> code_;
  std::size_t depth_ = 1;
};

}  // namespace ctmcsens
