#include <algorithm>
#include <cmath>
#include <sstream>

#include "divweb/error.hpp"
#include "divweb/measure.hpp"
#include "divweb/roots.hpp"

namespace divweb {

Region::Region(std::vector<double> a_, std::vector<double> b_) : a(std::move(a_)), b(std::move(b_)) {
  if (a.size() != b.size()) throw PreconditionError("region corners have different dimensions");
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] == b[k]) throw PreconditionError("region has zero length along axis " + std::to_string(k + 1));
}

int Region::orientation() const {
  int s = 1;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (b[k] < a[k]) s = -s;
  return s;
}

Box Region::box() const {
  Box out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    out.lo.push_back(std::min(a[k], b[k]));
    out.hi.push_back(std::max(a[k], b[k]));
  }
  return out;
}

namespace {

void require_inside(const WebChart& w, const Box& b) {
  if (static_cast<int>(b.dim()) != w.dim()) throw PreconditionError("region dimension differs from chart dimension");
  const double slack = 1e-12 * std::max(1.0, w.domain().diameter());
  if (!w.domain().contains(b.lo, slack) || !w.domain().contains(b.hi, slack))
    throw PreconditionError("region " + format_point(b.lo) + " .. " + format_point(b.hi) + " leaves the chart domain");
}

BoxIntegrand density_of(const WebChart& w) {
  return [&w](std::span<const double> x) { return w.h(x); };
}

double box_volume(const WebChart& w, const Box& b, const QuadratureSpec& spec, double& error) {
  const QuadResult r = integrate_box(density_of(w), b.lo, b.hi, spec);
  error += r.error;
  return r.value;
}

// ∫ h over the face of `b` where coordinate `axis` equals `value`.
double face_integral(const WebChart& w, const Box& b, int axis, double value, const QuadratureSpec& spec) {
  const std::size_t m = b.dim(), ax = static_cast<std::size_t>(axis);
  std::vector<double> lo, hi;
  for (std::size_t k = 0; k < m; ++k)
    if (k != ax) lo.push_back(b.lo[k]), hi.push_back(b.hi[k]);
  std::vector<double> x(m);
  auto f = [&](std::span<const double> t) {
    for (std::size_t k = 0, n = 0; k < m; ++k) x[k] = k == ax ? value : t[n++];
    return w.h(x);
  };
  return integrate_box(f, lo, hi, spec).value;
}

}  // namespace

QuadResult region_volume(const WebChart& w, const Region& R, const QuadratureSpec& spec) {
  require_inside(w, R.box());
  return integrate_box(density_of(w), R.a, R.b, spec);
}

SubdivisionVolumes subdivision_volumes(const WebChart& w, const Region& K, std::span<const double> p, int i, int j,
                                       const QuadratureSpec& spec) {
  const Box box = K.box();
  require_inside(w, box);
  const int m = w.dim();
  if (i < 0 || j < 0 || i >= m || j >= m || i == j) throw PreconditionError("axes must be distinct chart axes");
  if (w.same_block(i, j)) throw PreconditionError("axes must belong to different blocks");
  if (p.size() != box.dim()) throw PreconditionError("anchor dimension differs from chart dimension");
  for (std::size_t k = 0; k < p.size(); ++k)
    if (!(p[k] > box.lo[k] && p[k] < box.hi[k]))
      throw PreconditionError("anchor " + format_point(p) + " is not interior to the region");

  const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
  auto part = [&](bool upper_i, bool upper_j, double& err) {
    Box b = box;
    (upper_i ? b.lo : b.hi)[ui] = p[ui];
    (upper_j ? b.lo : b.hi)[uj] = p[uj];
    return box_volume(w, b, spec, err);
  };
  SubdivisionVolumes v;
  v.a = part(false, true, v.error);
  v.b = part(true, true, v.error);
  v.c = part(true, false, v.error);
  v.d = part(false, false, v.error);
  return v;
}

ProductReport check_product_condition(const WebChart& w, const Region& K, std::span<const double> p, int i, int j,
                                      const QuadratureSpec& spec) {
  ProductReport r;
  r.volumes = subdivision_volumes(w, K, p, i, j, spec);
  const auto& v = r.volumes;
  r.bd_minus_ac = v.b * v.d - v.a * v.c;
  r.kappa = eval(nonuniformity_tensor(w)(i, j), p);
  r.diameter = K.diameter();
  // Each volume is off by at most its error; the products inherit the sum.
  r.tolerance = 2.0 * (v.a + v.b + v.c + v.d) * (spec.abs_tol + v.error);
  if (std::fabs(r.kappa) <= kDefaultZeroTolerance)
    r.consistent = std::fabs(r.bd_minus_ac) <= r.tolerance;
  else if (r.kappa > 0)
    r.consistent = r.bd_minus_ac > r.tolerance;
  else
    r.consistent = r.bd_minus_ac < -r.tolerance;
  return r;
}

SplitResult equal_split(const WebChart& w, const Region& K, const std::vector<int>& axes, const QuadratureSpec& spec,
                        double tol) {
  if (!w.is_codim1()) throw PreconditionError("equal_split needs a codimension-1 web (refine it first)");
  const Box box = K.box();
  require_inside(w, box);
  const int m = w.dim();
  for (std::size_t t = 0; t < axes.size(); ++t) {
    if (axes[t] < 0 || axes[t] >= m) throw PreconditionError("split axis out of range");
    for (std::size_t u = 0; u < t; ++u)
      if (axes[u] == axes[t]) throw PreconditionError("split axes must be distinct");
  }
  if (axes.size() > 16) throw PreconditionError("too many split axes");

  SplitResult out;
  out.axes = axes;
  out.tolerance = tol;
  double err = 0;
  const double total = box_volume(w, box, spec, err);

  for (int axis : axes) {
    const auto ax = static_cast<std::size_t>(axis);
    auto F = [&](double c) {
      double e = 0;
      Box lower = box;
      lower.hi[ax] = c;
      const double v = c == box.lo[ax] ? 0.0 : box_volume(w, lower, spec, e);
      return std::make_pair(v - 0.5 * total, face_integral(w, box, axis, c, spec));
    };
    RootOptions opt;
    opt.f_tol = 1e-3 * tol * std::max(1.0, std::fabs(total));
    const RootResult r = newton_bisect(F, box.lo[ax], box.hi[ax], opt);
    out.cuts.push_back(r.x);
  }

  const std::size_t k = axes.size();
  for (std::size_t cell = 0; cell < (std::size_t{1} << k); ++cell) {
    Box b = box;
    for (std::size_t t = 0; t < k; ++t) {
      const auto ax = static_cast<std::size_t>(axes[t]);
      ((cell >> t) & 1u ? b.lo : b.hi)[ax] = out.cuts[t];
    }
    out.cell_volumes.push_back(box_volume(w, b, spec, err));
  }
  const auto [mn, mx] = std::minmax_element(out.cell_volumes.begin(), out.cell_volumes.end());
  out.spread = *mx - *mn;
  out.equal = out.spread <= tol;
  return out;
}

}  // namespace divweb
