#pragma once

#include <functional>
#include <optional>

namespace divweb {

struct RootResult {
  double x = 0.0;
  double residual = 0.0;  // |f(x)|
  int iterations = 0;
};

struct RootOptions {
  double f_tol = 1e-12;  // stop when |f| <= f_tol
  double x_tol = 0.0;    // or when the bracket is narrower than x_tol
  int max_iterations = 200;
};

/// f and its derivative at one point.
using ValueAndSlope = std::function<std::pair<double, double>(double)>;

/// Safeguarded Newton iteration inside a sign-changing bracket [lo, hi].
/// A Newton step that leaves the bracket, or fails to halve |f|, is
/// replaced by bisection. Throws NumericError if f(lo), f(hi) have the same
/// sign or the tolerance is not met within max_iterations.
RootResult newton_bisect(const ValueAndSlope& f, double lo, double hi, const RootOptions& opt = {});

/// Walk from `start` in direction sign(step), multiplying the step by
/// `growth` each time, until f changes sign relative to f(origin) or the
/// walk passes `limit`. Returns the bracket (unordered pair of abscissae).
std::optional<std::pair<double, double>> expand_bracket(const std::function<double(double)>& f, double origin,
                                                        double start, double limit, double growth = 1.6,
                                                        int max_steps = 60);

}  // namespace divweb
