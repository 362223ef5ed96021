#pragma once

#include <functional>
#include <span>
#include <vector>

namespace divweb {

struct QuadratureSpec {
  double abs_tol = 1e-12;  // target absolute error of the whole integral
  int max_depth = 40;      // bisection levels per 1D integral
  int order = 7;           // Gauss-Legendre points per panel
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  long evaluations = 0;
};

void validate(const QuadratureSpec& spec);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order);
};

/// Adaptive composite Gauss-Legendre on [a, b]. Signed: swapping the limits
/// negates the result. Throws NumericError when max_depth is exhausted.
QuadResult integrate_1d(const std::function<double(double)>& f, double a, double b, const QuadratureSpec& spec);

using BoxIntegrand = std::function<double(std::span<const double>)>;

/// Iterated adaptive quadrature over the oriented box from `a` to `b`
/// (axis k runs from a[k] to b[k]). The tolerance is shared evenly among
/// the nesting levels and scaled by the widths of the enclosing axes.
QuadResult integrate_box(const BoxIntegrand& f, std::span<const double> a, std::span<const double> b,
                         const QuadratureSpec& spec);

}  // namespace divweb
