// Recursive-descent parser for the expression grammar (see docs/grammar.md).
//
//   expr    = term { ("+" | "-") term }
//   term    = unary { ("*" | "/") unary }
//   unary   = ("-" | "+") unary | power
//   power   = primary [ "^" unary ]
//   primary = number | constant | variable | function "(" expr ")" | "(" expr ")"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <string>

#include "divweb/error.hpp"
#include "divweb/expr.hpp"

namespace divweb {

ParseError::ParseError(std::size_t position, std::vector<std::string> expected, const std::string& message)
    : Error(message), position_(position), expected_(std::move(expected)) {}

namespace {

struct Function {
  std::string_view name;
  Op op;
};

constexpr Function kFunctions[] = {
    {"exp", Op::kExp}, {"log", Op::kLog}, {"sqrt", Op::kSqrt}, {"sin", Op::kSin}, {"cos", Op::kCos},
};

class Parser {
 public:
  Parser(std::string_view src, std::span<const std::string> vars) : src_(src), vars_(vars) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail({"operator", "end of input"});
    return e;
  }

 private:
  std::string_view src_;
  std::span<const std::string> vars_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  [[noreturn]] void fail(std::vector<std::string> expected, std::size_t at = std::string::npos) {
    if (at == std::string::npos) at = pos_;
    std::ostringstream msg;
    msg << "syntax error at position " << at << ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) msg << (i ? " or " : "") << expected[i];
    if (at < src_.size())
      msg << ", found '" << src_[at] << "'";
    else
      msg << ", found end of input";
    throw ParseError(at, std::move(expected), msg.str());
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = Expr::binary(Op::kAdd, lhs, term());
      else if (accept('-'))
        lhs = Expr::binary(Op::kSub, lhs, term());
      else
        return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = Expr::binary(Op::kMul, lhs, unary());
      else if (accept('/'))
        lhs = Expr::binary(Op::kDiv, lhs, unary());
      else
        return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::unary(Op::kNeg, unary());
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary(Op::kPow, base, unary());
    return base;
  }

  Expr primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      if (!accept(')')) fail({"')'"});
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail({"number", "identifier", "'('"});
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) fail({"digit"}, start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // not an exponent; leave 'e' for the caller
    }
    const std::string text(src_.substr(start, pos_ - start));
    return Expr::constant(std::strtod(text.c_str(), nullptr));
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    for (std::size_t k = 0; k < vars_.size(); ++k) {
      if (vars_[k] == name) {
        if (peek() == '(')
          throw ParseError(start, {"operator"}, "'" + std::string(name) + "' is a variable, not a function");
        return Expr::variable(std::string(name), static_cast<int>(k));
      }
    }
    for (const Function& f : kFunctions) {
      if (f.name != name) continue;
      if (!accept('(')) fail({"'(' after function name"});
      if (peek() == ')')
        throw ParseError(pos_, {"expression"}, "arity mismatch: " + std::string(name) + " expects 1 argument, got 0");
      Expr arg = expr();
      if (peek() == ',') {
        std::size_t extra = 1;
        while (accept(',')) {
          expr();
          ++extra;
        }
        throw ParseError(start, {"')'"},
                         "arity mismatch: " + std::string(name) + " expects 1 argument, got " + std::to_string(extra));
      }
      if (!accept(')')) fail({"')'"});
      return Expr::unary(f.op, arg);
    }
    if (name == "pi") return Expr::constant(std::numbers::pi);
    std::string known;
    for (std::size_t k = 0; k < vars_.size(); ++k) known += (k ? ", " : "") + vars_[k];
    throw ParseError(start, {"variable"},
                     "unknown variable '" + std::string(name) + "' at position " + std::to_string(start) +
                         " (declared: " + known + ")");
  }
};

}  // namespace

Expr parse_expr(std::string_view source, std::span<const std::string> vars) {
  return Parser(source, vars).parse();
}

}  // namespace divweb
