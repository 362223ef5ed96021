#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divweb/box.hpp"

namespace divweb {

enum class Op {
  kConst,
  kVar,
  kNeg,
  kExp,
  kLog,
  kSqrt,
  kSin,
  kCos,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
};

int arity(Op op);
std::string_view op_name(Op op);

/// Immutable scalar expression tree.
///
/// Variables carry both a name and a slot index into the variable list of
/// the chart they were parsed against; index-based evaluation is the fast
/// path, name-based evaluation exists for ad-hoc bindings.
class Expr {
 public:
  /// The constant 0.
  Expr();

  static Expr constant(double value);
  static Expr variable(std::string name, int index);
  static Expr unary(Op op, Expr arg);
  static Expr binary(Op op, Expr lhs, Expr rhs);

  Op op() const;
  double value() const;             // kConst only
  const std::string& name() const;  // kVar only
  int index() const;                // kVar only
  const Expr& arg(int i) const;

  bool is_constant() const { return op() == Op::kConst; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  /// Identity of the underlying node (cheap check before structural compare).
  bool same_node(const Expr& other) const { return node_ == other.node_; }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Builders. These do no simplification; use simplify() or the smart
/// constructors in namespace build for that.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

namespace build {
// Smart constructors: apply the local rules of simplify() at the root only.
Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr mul(const Expr& a, const Expr& b);
Expr div(const Expr& a, const Expr& b);
Expr pow(const Expr& a, const Expr& b);
Expr neg(const Expr& a);
Expr fn(Op op, const Expr& a);
}  // namespace build

/// Parse expression text. Identifiers must be one of `vars` (their position
/// becomes the variable index) or a builtin function/constant.
Expr parse_expr(std::string_view source, std::span<const std::string> vars);

/// IEEE evaluation; `x[k]` is the value of the variable with index k.
double eval(const Expr& e, std::span<const double> x);
double eval(const Expr& e, const std::map<std::string, double>& binding);

Expr differentiate(const Expr& e, int var_index);
Expr differentiate(const Expr& e, std::string_view var_name);

/// Constant folding, 0/1 identities, removal of neutral elements and
/// x - x, x / x cancellation for structurally equal operands.
Expr simplify(const Expr& e);

/// An expression whose partial derivatives equal those of log|e|.
///
/// Products, quotients, powers, roots and exponentials are split into sums
/// so that factors which do not depend on a variable disappear under
/// differentiation exactly. The result is only meant to be differentiated.
Expr log_expand(const Expr& e);

/// Replace variables by expressions. `replacement[k]`, when set, replaces
/// the variable with index k; unset slots keep the variable unchanged.
Expr substitute(const Expr& e, std::span<const std::optional<Expr>> replacement);

bool structurally_equal(const Expr& a, const Expr& b);
bool depends_on(const Expr& e, int var_index);
std::size_t node_count(const Expr& e);

/// Text in the input grammar; parse_expr(to_string(e)) reproduces e for
/// every tree produced by parse_expr.
std::string to_string(const Expr& e);

enum class ZeroKind { kSymbolicZero, kNumericallyZero, kNonzero };

struct ZeroVerdict {
  ZeroKind kind = ZeroKind::kSymbolicZero;
  double max_abs = 0.0;           // largest sampled |value|
  std::vector<double> witness;    // point of max_abs (empty for symbolic zero)

  bool is_zero() const { return kind != ZeroKind::kNonzero; }
};

std::string_view to_string(ZeroKind kind);

inline constexpr int kDefaultZeroSamples = 33 * 33;
inline constexpr double kDefaultZeroTolerance = 1e-9;

/// Decide whether `e` vanishes on `domain`.
///
/// Symbolic zero when simplify() reaches the constant 0. Otherwise the
/// box corners, its center and `samples` Halton points are evaluated and
/// the largest |value| is compared against `tol`.
ZeroVerdict is_identically_zero(const Expr& e, const Box& domain, int samples = kDefaultZeroSamples,
                                double tol = kDefaultZeroTolerance);

/// Low-discrepancy points in `domain` (Halton sequence, skipping index 0).
std::vector<std::vector<double>> halton_points(const Box& domain, int count);

}  // namespace divweb
