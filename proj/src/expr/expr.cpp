#include "divweb/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "divweb/error.hpp"

namespace divweb {

struct Expr::Node {
  Op op = Op::kConst;
  double value = 0.0;
  std::string name;
  int index = -1;
  std::array<Expr, 2> args;
};

int arity(Op op) {
  switch (op) {
    case Op::kConst:
    case Op::kVar:
      return 0;
    case Op::kNeg:
    case Op::kExp:
    case Op::kLog:
    case Op::kSqrt:
    case Op::kSin:
    case Op::kCos:
      return 1;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kPow:
      return 2;
  }
  return 0;
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kConst: return "const";
    case Op::kVar: return "var";
    case Op::kNeg: return "neg";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSqrt: return "sqrt";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kPow: return "pow";
  }
  return "?";
}

// A null node stands for the constant 0 so that Node can hold default Exprs.
Expr::Expr() : node_(nullptr) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::kConst;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name, int index) {
  auto n = std::make_shared<Node>();
  n->op = Op::kVar;
  n->name = std::move(name);
  n->index = index;
  return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr arg) {
  if (arity(op) != 1) throw std::invalid_argument("Expr::unary: not a unary op");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args[0] = std::move(arg);
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  if (arity(op) != 2) throw std::invalid_argument("Expr::binary: not a binary op");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args[0] = std::move(lhs);
  n->args[1] = std::move(rhs);
  return Expr(std::move(n));
}

Op Expr::op() const { return node_ ? node_->op : Op::kConst; }
double Expr::value() const { return node_ ? node_->value : 0.0; }

const std::string& Expr::name() const {
  static const std::string empty;
  return node_ ? node_->name : empty;
}

int Expr::index() const { return node_ ? node_->index : -1; }

const Expr& Expr::arg(int i) const {
  if (!node_ || i < 0 || i >= arity(node_->op)) throw std::out_of_range("Expr::arg");
  return node_->args[static_cast<std::size_t>(i)];
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::kAdd, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::kSub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::kMul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::kDiv, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(Op::kNeg, a); }

namespace {

double apply(Op op, double a, double b) {
  switch (op) {
    case Op::kNeg: return -a;
    case Op::kExp: return std::exp(a);
    case Op::kLog: return std::log(a);
    case Op::kSqrt: return std::sqrt(a);
    case Op::kSin: return std::sin(a);
    case Op::kCos: return std::cos(a);
    case Op::kAdd: return a + b;
    case Op::kSub: return a - b;
    case Op::kMul: return a * b;
    case Op::kDiv: return a / b;
    case Op::kPow: return std::pow(a, b);
    default: return 0.0;
  }
}

[[noreturn]] void domain_failure(const Expr& e, Op op, double a, double b) {
  std::string what;
  switch (op) {
    case Op::kLog: what = "log of non-positive value " + std::to_string(a); break;
    case Op::kSqrt: what = "sqrt of negative value " + std::to_string(a); break;
    case Op::kDiv: what = "division by zero"; break;
    case Op::kPow:
      what = "pow(" + std::to_string(a) + ", " + std::to_string(b) + ") is not real";
      break;
    default: what = "non-finite result"; break;
  }
  std::string sub = to_string(e);
  throw DomainError(sub, "domain error in '" + sub + "': " + what);
}

template <typename Lookup>
double eval_impl(const Expr& e, const Lookup& lookup) {
  const Op op = e.op();
  switch (op) {
    case Op::kConst: return e.value();
    case Op::kVar: return lookup(e);
    default: break;
  }
  const double a = eval_impl(e.arg(0), lookup);
  const double b = arity(op) == 2 ? eval_impl(e.arg(1), lookup) : 0.0;
  if (op == Op::kLog && !(a > 0.0)) domain_failure(e, op, a, b);
  if (op == Op::kSqrt && a < 0.0) domain_failure(e, op, a, b);
  if (op == Op::kDiv && b == 0.0) domain_failure(e, op, a, b);
  const double r = apply(op, a, b);
  if (!std::isfinite(r) && std::isfinite(a) && std::isfinite(b)) domain_failure(e, op, a, b);
  return r;
}

}  // namespace

double eval(const Expr& e, std::span<const double> x) {
  return eval_impl(e, [&](const Expr& v) -> double {
    const int k = v.index();
    if (k < 0 || static_cast<std::size_t>(k) >= x.size())
      throw std::out_of_range("eval: no value bound for variable '" + v.name() + "'");
    return x[static_cast<std::size_t>(k)];
  });
}

double eval(const Expr& e, const std::map<std::string, double>& binding) {
  return eval_impl(e, [&](const Expr& v) -> double {
    auto it = binding.find(v.name());
    if (it == binding.end()) throw std::out_of_range("eval: no value bound for variable '" + v.name() + "'");
    return it->second;
  });
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.same_node(b)) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::kConst: return a.value() == b.value() || (std::isnan(a.value()) && std::isnan(b.value()));
    case Op::kVar: return a.name() == b.name() && a.index() == b.index();
    default: break;
  }
  for (int i = 0; i < arity(a.op()); ++i)
    if (!structurally_equal(a.arg(i), b.arg(i))) return false;
  return true;
}

bool depends_on(const Expr& e, int var_index) {
  switch (e.op()) {
    case Op::kConst: return false;
    case Op::kVar: return e.index() == var_index;
    default: break;
  }
  for (int i = 0; i < arity(e.op()); ++i)
    if (depends_on(e.arg(i), var_index)) return true;
  return false;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for (int i = 0; i < arity(e.op()); ++i) n += node_count(e.arg(i));
  return n;
}

Expr substitute(const Expr& e, std::span<const std::optional<Expr>> replacement) {
  switch (e.op()) {
    case Op::kConst: return e;
    case Op::kVar: {
      const int k = e.index();
      if (k >= 0 && static_cast<std::size_t>(k) < replacement.size() && replacement[static_cast<std::size_t>(k)])
        return *replacement[static_cast<std::size_t>(k)];
      return e;
    }
    default: break;
  }
  if (arity(e.op()) == 1) return Expr::unary(e.op(), substitute(e.arg(0), replacement));
  return Expr::binary(e.op(), substitute(e.arg(0), replacement), substitute(e.arg(1), replacement));
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding strength as seen by the parser.
int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::kAdd:
    case Op::kSub: return 1;
    case Op::kMul:
    case Op::kDiv: return 2;
    case Op::kNeg: return 3;
    case Op::kPow: return 4;
    case Op::kConst: return e.value() < 0.0 || std::signbit(e.value()) ? 0 : 5;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf.data(), ptr);
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
  const Op op = e.op();
  switch (op) {
    case Op::kConst: out += format_number(e.value()); return;
    case Op::kVar: out += e.name(); return;
    case Op::kNeg:
      out += '-';
      print_wrapped(e.arg(0), precedence(e.arg(0)) < 3, out);
      return;
    case Op::kExp:
    case Op::kLog:
    case Op::kSqrt:
    case Op::kSin:
    case Op::kCos:
      out += op_name(op);
      print_wrapped(e.arg(0), true, out);
      return;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv: {
      const int p = (op == Op::kAdd || op == Op::kSub) ? 1 : 2;
      print_wrapped(e.arg(0), precedence(e.arg(0)) < p, out);
      out += op == Op::kAdd ? " + " : op == Op::kSub ? " - " : op == Op::kMul ? "*" : "/";
      print_wrapped(e.arg(1), precedence(e.arg(1)) <= p, out);
      return;
    }
    case Op::kPow:
      print_wrapped(e.arg(0), precedence(e.arg(0)) < 5, out);
      out += '^';
      print_wrapped(e.arg(1), precedence(e.arg(1)) < 3, out);
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

}  // namespace divweb
