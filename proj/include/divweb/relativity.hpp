#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "divweb/web.hpp"

namespace divweb {

/// g = −α² dt² + γ in normal coordinates (t, x1, x2, x3). Expressions use
/// the coordinate indices 0..3.
struct SplitMetric {
  std::vector<std::string> coordinates;
  Expr lapse;
  std::array<std::array<Expr, 3>, 3> gamma;

  /// α > 0 and leading principal minors of γ > 0 at sampled points of
  /// `domain`; throws PreconditionError otherwise.
  void validate(const Box& domain, int samples = 256) const;
};

/// Splits a full 4×4 metric (row/column 0 is time). Throws
/// PreconditionError when some g_0k is not symbolically zero.
SplitMetric from_full_metric(std::vector<std::string> coordinates, const std::array<std::array<Expr, 4>, 4>& g);

/// Symbolic 3×3 cofactor determinant.
Expr determinant3(const std::array<std::array<Expr, 3>, 3>& a);

/// α · sqrt(det γ), simplified.
Expr volume_density(const SplitMetric& gm);

/// Blocks ({t}, {x1, x2, x3}) with h = volume_density.
WebChart web_from_metric(const SplitMetric& gm, const Box& domain);

struct SlicingReport {
  Expr density;
  std::array<Expr, 3> kappa;  // 𝒦(t, x_k)
  TrivialityVerdict triviality;
  bool geodesic_slicing = false;       // ∂α/∂x_k ≡ 0 for k = 1..3
  bool conservation_simplifies = false;  // α sqrt(det γ) can be made constant: same as triviality
};

SlicingReport slicing_report(const SplitMetric& gm, const Box& domain);

/// "minkowski", "schwarzschild_radial" (param m) or "lemaitre" (param m).
SplitMetric builtin_spacetime(const std::string& name, const std::map<std::string, double>& params = {});

/// A box clear of coordinate singularities for the builtin.
Box builtin_domain(const std::string& name, const std::map<std::string, double>& params = {});

std::vector<std::string> builtin_spacetime_names();

/// Coefficients of dT² and dT dr when κ_TR dT dR of the Lemaître chart is
/// pulled back along R = (2/3) r^(3/2) + sqrt(2m) T. Expressions in (T, r).
struct PainlevePullback {
  Expr dT2;
  Expr dTdr;
};

PainlevePullback painleve_pullback(double m);

}  // namespace divweb
