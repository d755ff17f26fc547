#pragma once

// Line-oriented model file format:
//
//   network gene
//   species: M P
//   params: theta=0.25
//   init: M=0 P=0
//   reaction: -> M ; rate = 2
//   reaction: M -> M + P ; rate = mass_action(10)
//   reaction: M -> ; rate = theta*M
//
// `#` starts a comment. Rate expressions use + - * / ^ (right associative),
// unary minus, parentheses, numbers, species and parameter names, log(e)
// and mass_action(e); mass_action(c) is c times the falling factorial of the
// reaction's reactant counts.

#include <cctype>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctmcsens/model/network.hpp"

namespace ctmcsens {

namespace detail {

enum class Tok { kName, kNumber, kSymbol, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  int column = 0;  // 1-based
};

inline std::vector<Token> tokenize_line(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    int col = static_cast<int>(i) + 1;
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_'))
        ++j;
      out.push_back({Tok::kName, std::string(line.substr(i, j - i)), col});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      if (j < line.size() && line[j] == '.') {
        ++j;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      }
      if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
        if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
          while (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) ++k;
          j = k;
        }
      }
      std::string text(line.substr(i, j - i));
      if (text == ".") throw ModelError("syntax error at '.'", line_no, col);
      out.push_back({Tok::kNumber, text, col});
      i = j;
      continue;
    }
    if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      out.push_back({Tok::kSymbol, "->", col});
      i += 2;
      continue;
    }
    if (std::string_view("+-*/^()=;:").find(c) != std::string_view::npos) {
      out.push_back({Tok::kSymbol, std::string(1, c), col});
      ++i;
      continue;
    }
    throw ModelError(std::string("unexpected character '") + c + "'", line_no, col);
  }
  out.push_back({Tok::kEnd, "", static_cast<int>(line.size()) + 1});
  return out;
}

struct NameScope {
  const std::vector<std::string>* species = nullptr;
  const ParamMap* params = nullptr;
  // Set while parsing a reaction rate; enables mass_action().
  const std::map<std::size_t, int>* reactants = nullptr;
};

class LineParser {
 public:
  LineParser(std::vector<Token> toks, int line_no) : toks_(std::move(toks)), line_(line_no) {}

  const Token& peek() const { return toks_[pos_]; }
  bool at_end() const { return peek().kind == Tok::kEnd; }
  bool peek_symbol(std::string_view s) const {
    return peek().kind == Tok::kSymbol && peek().text == s;
  }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const Token& t) const {
    if (t.kind == Tok::kEnd) throw ModelError("syntax error at end of line", line_, t.column);
    throw ModelError("syntax error at '" + t.text + "'", line_, t.column);
  }
  [[noreturn]] void fail_msg(const std::string& msg, const Token& t) const {
    throw ModelError(msg, line_, t.column);
  }

  void expect_symbol(std::string_view s) {
    if (!peek_symbol(s)) fail(peek());
    next();
  }
  std::string expect_name() {
    if (peek().kind != Tok::kName) fail(peek());
    return next().text;
  }
  void expect_end() {
    if (!at_end()) fail(peek());
  }

  double parse_real() {
    bool negative = false;
    if (peek_symbol("-") || peek_symbol("+")) negative = next().text == "-";
    if (peek().kind != Tok::kNumber) fail(peek());
    double v = std::stod(next().text);
    return negative ? -v : v;
  }

  long long parse_int() {
    const Token& t = peek();
    if (t.kind != Tok::kNumber || t.text.find_first_not_of("0123456789") != std::string::npos)
      fail(t);
    return std::stoll(next().text);
  }

  Expr parse_expr(const NameScope& scope) {
    Expr lhs = parse_term(scope);
    while (peek_symbol("+") || peek_symbol("-")) {
      Op op = next().text == "+" ? Op::kAdd : Op::kSub;
      lhs = Expr::binary(op, lhs, parse_term(scope));
    }
    return lhs;
  }

 private:
  Expr parse_term(const NameScope& scope) {
    Expr lhs = parse_unary(scope);
    while (peek_symbol("*") || peek_symbol("/")) {
      Op op = next().text == "*" ? Op::kMul : Op::kDiv;
      lhs = Expr::binary(op, lhs, parse_unary(scope));
    }
    return lhs;
  }

  Expr parse_unary(const NameScope& scope) {
    if (peek_symbol("-")) {
      next();
      if (peek().kind == Tok::kNumber && !(toks_[pos_ + 1].kind == Tok::kSymbol &&
                                           toks_[pos_ + 1].text == "^")) {
        return Expr::constant(-std::stod(next().text));
      }
      return Expr::unary(Op::kNeg, parse_unary(scope));
    }
    return parse_power(scope);
  }

  Expr parse_power(const NameScope& scope) {
    Expr base = parse_primary(scope);
    if (peek_symbol("^")) {
      next();
      return Expr::binary(Op::kPow, base, parse_unary(scope));
    }
    return base;
  }

  Expr parse_primary(const NameScope& scope) {
    const Token t = peek();
    if (t.kind == Tok::kNumber) {
      next();
      return Expr::constant(std::stod(t.text));
    }
    if (peek_symbol("(")) {
      next();
      Expr e = parse_expr(scope);
      expect_symbol(")");
      return e;
    }
    if (t.kind == Tok::kName) {
      next();
      if (t.text == "mass_action" || t.text == "log") {
        expect_symbol("(");
        Expr arg = parse_expr(scope);
        expect_symbol(")");
        if (t.text == "log") return Expr::unary(Op::kLog, arg);
        if (scope.reactants == nullptr)
          fail_msg("mass_action is only valid in a reaction rate", t);
        std::vector<Reactant> rs;
        for (auto [i, c] : *scope.reactants) rs.push_back({i, c});
        return Expr::mass_action(arg, std::move(rs));
      }
      for (std::size_t i = 0; i < scope.species->size(); ++i)
        if ((*scope.species)[i] == t.text) return Expr::species(i, t.text);
      if (scope.params && scope.params->count(t.text)) return Expr::param(t.text);
      fail_msg("unresolved identifier '" + t.text + "'", t);
    }
    fail(t);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int line_;
};

inline std::map<std::size_t, int> parse_side(LineParser& p, const ReactionNetwork& net,
                                             std::string_view terminator) {
  std::map<std::size_t, int> side;
  if (p.peek_symbol(terminator)) return side;
  while (true) {
    int coef = 1;
    Token coef_tok = p.peek();
    if (coef_tok.kind == Tok::kNumber) {
      long long c = p.parse_int();
      if (c < 1) p.fail_msg("stoichiometric coefficient must be >= 1", coef_tok);
      coef = static_cast<int>(c);
    }
    Token name_tok = p.peek();
    std::string name = p.expect_name();
    auto idx = net.species_index(name);
    if (!idx) p.fail_msg("unresolved species '" + name + "'", name_tok);
    side[*idx] += coef;
    if (!p.peek_symbol("+")) break;
    p.next();
  }
  return side;
}

}  // namespace detail

/// Parses a model file; throws ModelError with line and column on failure.
inline ReactionNetwork parse_model(std::string_view text) {
  using namespace detail;
  struct Line {
    int number;
    std::vector<Token> toks;
  };
  std::vector<Line> lines;
  {
    int no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view raw = text.substr(start, end - start);
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      ++no;
      auto toks = tokenize_line(raw, no);
      if (toks.size() > 1) lines.push_back({no, std::move(toks)});
      start = end + 1;
    }
  }
  if (lines.empty()) throw ModelError("empty model: expected 'network NAME'");

  ReactionNetwork net;
  // Pass 1: header, species and parameters, so reactions may appear anywhere.
  {
    LineParser p(lines[0].toks, lines[0].number);
    if (p.peek().kind != Tok::kName || p.peek().text != "network") p.fail(p.peek());
    p.next();
    net.name = p.expect_name();
    p.expect_end();
  }
  std::set<std::string> param_names;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    LineParser p(lines[li].toks, lines[li].number);
    Token head = p.peek();
    std::string kw = p.expect_name();
    p.expect_symbol(":");
    if (kw == "species") {
      do {
        Token t = p.peek();
        std::string s = p.expect_name();
        if (net.species_index(s)) p.fail_msg("duplicate species '" + s + "'", t);
        net.species.push_back(s);
      } while (!p.at_end());
    } else if (kw == "params") {
      do {
        Token t = p.peek();
        std::string s = p.expect_name();
        p.expect_symbol("=");
        if (!param_names.insert(s).second) p.fail_msg("duplicate parameter '" + s + "'", t);
        net.parameters[s] = p.parse_real();
      } while (!p.at_end());
    } else if (kw != "init" && kw != "reaction") {
      p.fail_msg("unknown line keyword '" + kw + "'", head);
    }
  }
  for (const auto& s : net.species)
    if (net.parameters.count(s))
      throw ModelError("name '" + s + "' is both a species and a parameter");

  // Pass 2: initial state and reactions.
  for (std::size_t li = 1; li < lines.size(); ++li) {
    LineParser p(lines[li].toks, lines[li].number);
    std::string kw = p.expect_name();
    p.expect_symbol(":");
    if (kw == "init") {
      if (net.initial.empty()) net.initial.assign(net.num_species(), 0);
      do {
        Token t = p.peek();
        std::string s = p.expect_name();
        auto idx = net.species_index(s);
        if (!idx) p.fail_msg("unresolved species '" + s + "'", t);
        p.expect_symbol("=");
        net.initial[*idx] = p.parse_int();
      } while (!p.at_end());
    } else if (kw == "reaction") {
      Token start = p.peek();
      Reaction r;
      r.reactants = parse_side(p, net, "->");
      p.expect_symbol("->");
      r.products = parse_side(p, net, ";");
      p.expect_symbol(";");
      Token rate_kw = p.peek();
      if (p.expect_name() != "rate") p.fail(rate_kw);
      p.expect_symbol("=");
      NameScope scope{&net.species, &net.parameters, &r.reactants};
      r.rate = p.parse_expr(scope);
      p.expect_end();
      r.zeta.assign(net.num_species(), 0);
      for (auto [i, c] : r.products) r.zeta[i] += c;
      for (auto [i, c] : r.reactants) r.zeta[i] -= c;
      bool all_zero = true;
      for (Count z : r.zeta) all_zero = all_zero && z == 0;
      if (all_zero) p.fail_msg("reaction vector is all zero", start);
      net.reactions.push_back(std::move(r));
    }
  }
  validate(net);
  return net;
}

/// Parses an observable such as "P" or "M + 2*P" over the network's species
/// (parameters are allowed, mass_action is not).
inline Expr parse_observable(std::string_view text, const ReactionNetwork& net) {
  using namespace detail;
  LineParser p(tokenize_line(text, 1), 1);
  NameScope scope{&net.species, &net.parameters, nullptr};
  Expr e = p.parse_expr(scope);
  p.expect_end();
  return e;
}

/// Renders a network in the model file format; parse_model() of the result
/// yields an equal network.
inline std::string to_model_text(const ReactionNetwork& net) {
  std::ostringstream os;
  os << "network " << net.name << "\n";
  os << "species:";
  for (const auto& s : net.species) os << " " << s;
  os << "\n";
  if (!net.parameters.empty()) {
    os << "params:";
    for (const auto& [k, v] : net.parameters) os << " " << k << "=" << detail::format_number(v);
    os << "\n";
  }
  if (!net.initial.empty()) {
    os << "init:";
    for (std::size_t i = 0; i < net.num_species(); ++i)
      os << " " << net.species[i] << "=" << net.initial[i];
    os << "\n";
  }
  auto side = [&](const std::map<std::size_t, int>& m) {
    bool first = true;
    for (auto [i, c] : m) {
      os << (first ? "" : " + ");
      first = false;
      if (c != 1) os << c << " ";
      os << net.species[i];
    }
  };
  for (const auto& r : net.reactions) {
    os << "reaction: ";
    side(r.reactants);
    os << (r.reactants.empty() ? "-> " : " -> ");
    side(r.products);
    os << (r.products.empty() ? "; rate = " : " ; rate = ") << to_string(r.rate) << "\n";
  }
  return os.str();
}

}  // namespace ctmcsens
