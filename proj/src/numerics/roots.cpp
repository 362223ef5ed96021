#include "divweb/roots.hpp"

#include <cmath>
#include <sstream>
#include <tuple>

#include "divweb/error.hpp"

namespace divweb {

RootResult newton_bisect(const ValueAndSlope& f, double lo, double hi, const RootOptions& opt) {
  if (lo > hi) std::swap(lo, hi);
  auto [flo, dlo] = f(lo);
  auto [fhi, dhi] = f(hi);
  (void)dlo;
  (void)dhi;
  RootResult r;
  if (std::fabs(flo) <= opt.f_tol) return {lo, std::fabs(flo), 0};
  if (std::fabs(fhi) <= opt.f_tol) return {hi, std::fabs(fhi), 0};
  if ((flo > 0) == (fhi > 0)) {
    std::ostringstream msg;
    msg << "root not bracketed: f(" << lo << ") = " << flo << ", f(" << hi << ") = " << fhi;
    throw NumericError(msg.str());
  }
  const bool rising = fhi > 0;
  double x = std::fabs(flo) < std::fabs(fhi) ? lo : hi;
  auto [fx, dfx] = f(x);
  double last_abs = std::fabs(fx);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    double next = x - fx / dfx;
    const bool newton_ok = std::isfinite(next) && next > lo && next < hi;
    if (!newton_ok) next = 0.5 * (lo + hi);
    auto [fn, dfn] = f(next);
    if (newton_ok && std::fabs(fn) > 0.5 * last_abs) {
      // Newton stalled: shrink the bracket with the point anyway, then bisect.
      if ((fn > 0) == rising) hi = next; else lo = next;
      next = 0.5 * (lo + hi);
      std::tie(fn, dfn) = f(next);
    }
    x = next;
    fx = fn;
    dfx = dfn;
    last_abs = std::fabs(fx);
    if ((fx > 0) == rising) hi = x; else lo = x;
    if (last_abs <= opt.f_tol || hi - lo <= opt.x_tol) {
      r = {x, last_abs, it};
      return r;
    }
  }
  std::ostringstream msg;
  msg << "root solver did not converge: |f| = " << last_abs << " after " << opt.max_iterations
      << " iterations (tolerance " << opt.f_tol << ")";
  throw NumericError(msg.str());
}

std::optional<std::pair<double, double>> expand_bracket(const std::function<double(double)>& f, double origin,
                                                        double start, double limit, double growth, int max_steps) {
  const double f0 = f(origin);
  const double dir = start >= origin ? 1.0 : -1.0;
  double step = start - origin;
  double prev = origin;
  for (int k = 0; k < max_steps; ++k) {
    double x = origin + step;
    bool last = false;
    if ((x - limit) * dir >= 0) {
      x = limit;
      last = true;
    }
    const double fx = f(x);
    if (fx == 0.0 || (fx > 0) != (f0 > 0)) return std::make_pair(prev, x);
    if (last) return std::nullopt;
    prev = x;
    step *= growth;
  }
  return std::nullopt;
}

}  // namespace divweb
