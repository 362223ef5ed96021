#pragma once

// Random expression trees that are smooth and finite on [-1, 1]^n.

#include <random>
#include <string>
#include <vector>

#include "divweb/expr.hpp"

namespace divweb::testing {

inline Expr random_tree(std::mt19937_64& rng, int depth, int nvars) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  static const char* names[] = {"x", "y", "z", "w"};
  const int kind = depth <= 0 ? 0 : pick(rng);
  auto sub = [&] { return random_tree(rng, depth - 1, nvars); };
  auto positive = [&](const Expr& a) { return Expr::constant(0.5) + a * a; };
  switch (kind) {
    case 0:
    case 1: {
      if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) return Expr::constant(coef(rng));
      const int v = std::uniform_int_distribution<int>(0, nvars - 1)(rng);
      return Expr::variable(names[v], v);
    }
    case 2: return sub() + sub();
    case 3: return sub() - sub();
    case 4: return sub() * sub();
    case 5: return sub() / positive(sub());
    case 6: {
      const Expr a = sub();
      return Expr::unary(Op::kExp, a / positive(a));
    }
    case 7: return Expr::unary(Op::kLog, positive(sub()));
    case 8: return Expr::unary(std::uniform_int_distribution<int>(0, 1)(rng) ? Op::kSin : Op::kCos, sub());
    default: {
      const int power = std::uniform_int_distribution<int>(2, 3)(rng);
      if (std::uniform_int_distribution<int>(0, 1)(rng))
        return Expr::binary(Op::kPow, sub(), Expr::constant(power));
      return Expr::unary(Op::kSqrt, positive(sub())) - Expr::unary(Op::kNeg, sub());
    }
  }
}

inline std::vector<std::string> variable_names(int n) {
  static const char* names[] = {"x", "y", "z", "w"};
  return {names, names + n};
}

}  // namespace divweb::testing
