#include <cmath>

#include "divweb/expr.hpp"

namespace divweb {

namespace {

Expr k(double v) { return Expr::constant(v); }

bool is_neg_one(const Expr& e) { return e.is_constant(-1.0); }

// Fold only when the result is an ordinary number; NaN and inf stay symbolic
// so that eval() can report the domain error with context.
bool fold(double v, Expr& out) {
  if (!std::isfinite(v)) return false;
  out = k(v);
  return true;
}

}  // namespace

namespace build {

Expr neg(const Expr& a) {
  if (a.is_constant()) return k(a.value() == 0.0 ? 0.0 : -a.value());
  if (a.op() == Op::kNeg) return a.arg(0);
  return Expr::unary(Op::kNeg, a);
}

Expr add(const Expr& a, const Expr& b) {
  Expr r;
  if (a.is_constant() && b.is_constant() && fold(a.value() + b.value(), r)) return r;
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (b.op() == Op::kNeg) return sub(a, b.arg(0));
  if (b.is_constant() && b.value() < 0.0) return sub(a, k(-b.value()));
  if (a.op() == Op::kNeg) return sub(b, a.arg(0));
  return Expr::binary(Op::kAdd, a, b);
}

Expr sub(const Expr& a, const Expr& b) {
  Expr r;
  if (a.is_constant() && b.is_constant() && fold(a.value() - b.value(), r)) return r;
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return neg(b);
  if (structurally_equal(a, b)) return k(0.0);
  if (b.op() == Op::kNeg) return add(a, b.arg(0));
  return Expr::binary(Op::kSub, a, b);
}

Expr mul(const Expr& a, const Expr& b) {
  Expr r;
  if (a.is_constant() && b.is_constant() && fold(a.value() * b.value(), r)) return r;
  if (a.is_constant(0.0) || b.is_constant(0.0)) return k(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (is_neg_one(a)) return neg(b);
  if (is_neg_one(b)) return neg(a);
  if (a.op() == Op::kNeg && b.op() == Op::kNeg) return mul(a.arg(0), b.arg(0));
  if (a.op() == Op::kNeg) return neg(mul(a.arg(0), b));
  if (b.op() == Op::kNeg) return neg(mul(a, b.arg(0)));
  // Constants go to the left and merge: c*(d*x) -> (cd)*x.
  if (b.is_constant() && !a.is_constant()) return mul(b, a);
  if (a.is_constant() && b.op() == Op::kMul && b.arg(0).is_constant())
    return mul(k(a.value() * b.arg(0).value()), b.arg(1));
  return Expr::binary(Op::kMul, a, b);
}

Expr div(const Expr& a, const Expr& b) {
  Expr r;
  if (a.is_constant() && b.is_constant() && b.value() != 0.0 && fold(a.value() / b.value(), r)) return r;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return k(0.0);
  if (b.is_constant(1.0)) return a;
  if (is_neg_one(b)) return neg(a);
  if (structurally_equal(a, b) && !a.is_constant(0.0)) return k(1.0);
  if (a.op() == Op::kNeg) return neg(div(a.arg(0), b));
  if (b.op() == Op::kNeg) return neg(div(a, b.arg(0)));
  return Expr::binary(Op::kDiv, a, b);
}

Expr pow(const Expr& a, const Expr& b) {
  Expr r;
  if (a.is_constant() && b.is_constant() && fold(std::pow(a.value(), b.value()), r)) return r;
  if (b.is_constant(1.0)) return a;
  if (b.is_constant(0.0)) return k(1.0);
  if (a.is_constant(1.0)) return k(1.0);
  return Expr::binary(Op::kPow, a, b);
}

Expr fn(Op op, const Expr& a) {
  if (op == Op::kNeg) return neg(a);
  Expr r;
  if (a.is_constant()) {
    const double v = a.value();
    switch (op) {
      case Op::kExp:
        if (fold(std::exp(v), r)) return r;
        break;
      case Op::kLog:
        if (v > 0.0 && fold(std::log(v), r)) return r;
        break;
      case Op::kSqrt:
        if (v >= 0.0 && fold(std::sqrt(v), r)) return r;
        break;
      case Op::kSin:
        if (fold(std::sin(v), r)) return r;
        break;
      case Op::kCos:
        if (fold(std::cos(v), r)) return r;
        break;
      default: break;
    }
  }
  if (op == Op::kExp && a.op() == Op::kLog) return a.arg(0);
  if (op == Op::kLog && a.op() == Op::kExp) return a.arg(0);
  return Expr::unary(op, a);
}

}  // namespace build

Expr simplify(const Expr& e) {
  switch (e.op()) {
    case Op::kConst:
    case Op::kVar: return e;
    case Op::kNeg: return build::neg(simplify(e.arg(0)));
    case Op::kExp:
    case Op::kLog:
    case Op::kSqrt:
    case Op::kSin:
    case Op::kCos: return build::fn(e.op(), simplify(e.arg(0)));
    default: break;
  }
  const Expr a = simplify(e.arg(0));
  const Expr b = simplify(e.arg(1));
  switch (e.op()) {
    case Op::kAdd: return build::add(a, b);
    case Op::kSub: return build::sub(a, b);
    case Op::kMul: return build::mul(a, b);
    case Op::kDiv: return build::div(a, b);
    case Op::kPow: return build::pow(a, b);
    default: return e;
  }
}

Expr differentiate(const Expr& e, int v) {
  using namespace build;
  if (!depends_on(e, v)) return k(0.0);
  switch (e.op()) {
    case Op::kConst: return k(0.0);
    case Op::kVar: return k(1.0);
    default: break;
  }
  const Expr& a = e.arg(0);
  const Expr da = differentiate(a, v);
  switch (e.op()) {
    case Op::kNeg: return neg(da);
    case Op::kExp: return mul(fn(Op::kExp, a), da);
    case Op::kLog: return div(da, a);
    case Op::kSqrt: return div(da, mul(k(2.0), fn(Op::kSqrt, a)));
    case Op::kSin: return mul(fn(Op::kCos, a), da);
    case Op::kCos: return neg(mul(fn(Op::kSin, a), da));
    default: break;
  }
  const Expr& b = e.arg(1);
  const Expr db = differentiate(b, v);
  switch (e.op()) {
    case Op::kAdd: return add(da, db);
    case Op::kSub: return sub(da, db);
    case Op::kMul: return add(mul(da, b), mul(a, db));
    case Op::kDiv:
      if (!depends_on(b, v)) return div(da, b);
      return div(sub(mul(da, b), mul(a, db)), pow(b, k(2.0)));
    case Op::kPow: {
      if (!depends_on(b, v)) {
        const Expr c = simplify(b);
        return mul(mul(c, pow(a, sub(c, k(1.0)))), da);
      }
      const Expr ab = Expr::binary(Op::kPow, a, b);
      if (!depends_on(a, v)) return mul(mul(ab, fn(Op::kLog, a)), db);
      return mul(ab, add(mul(db, fn(Op::kLog, a)), div(mul(b, da), a)));
    }
    default: return k(0.0);
  }
}

Expr differentiate(const Expr& e, std::string_view name) {
  // Resolve the name to the index recorded in the tree.
  int index = -1;
  auto find = [&](auto&& self, const Expr& x) -> void {
    if (index >= 0) return;
    if (x.op() == Op::kVar) {
      if (x.name() == name) index = x.index();
      return;
    }
    for (int i = 0; i < arity(x.op()); ++i) self(self, x.arg(i));
  };
  find(find, e);
  if (index < 0) return k(0.0);
  return differentiate(e, index);
}

Expr log_expand(const Expr& e) {
  using namespace build;
  switch (e.op()) {
    case Op::kConst: {
      const double v = std::fabs(e.value());
      return k(v > 0.0 ? std::log(v) : 0.0);
    }
    case Op::kNeg: return log_expand(e.arg(0));
    case Op::kExp: return simplify(e.arg(0));
    case Op::kSqrt: return mul(k(0.5), log_expand(e.arg(0)));
    case Op::kMul: return add(log_expand(e.arg(0)), log_expand(e.arg(1)));
    case Op::kDiv: return sub(log_expand(e.arg(0)), log_expand(e.arg(1)));
    case Op::kPow: return mul(simplify(e.arg(1)), log_expand(e.arg(0)));
    default: break;
  }
  return fn(Op::kLog, simplify(e));
}

}  // namespace divweb
