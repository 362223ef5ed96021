#include <cmath>

#include "divweb/error.hpp"
#include "divweb/web.hpp"

namespace divweb {

GeodesicPath integrate_geodesic(const WebChart& w, std::span<const double> p, std::span<const double> v,
                                double t_end, int steps) {
  if (!w.is_codim1()) throw PreconditionError("geodesics need one block per coordinate (refine the web first)");
  if (steps < 1) throw PreconditionError("geodesic step count must be at least 1");
  const std::size_t m = static_cast<std::size_t>(w.dim());
  if (p.size() != m || v.size() != m) throw PreconditionError("point and velocity must match the chart dimension");
  if (!w.domain().contains(p)) throw PreconditionError("start point " + format_point(p) + " outside domain");

  std::vector<Expr> grad(m);
  for (std::size_t k = 0; k < m; ++k) grad[k] = simplify(differentiate(w.log_density(), static_cast<int>(k)));

  // State s = (x, v); s' = (v, -grad_k log h * v_k^2).
  auto rhs = [&](const std::vector<double>& s) {
    std::vector<double> d(2 * m);
    const std::span<const double> x(s.data(), m);
    for (std::size_t k = 0; k < m; ++k) {
      d[k] = s[m + k];
      d[m + k] = -eval(grad[k], x) * s[m + k] * s[m + k];
    }
    return d;
  };
  auto axpy = [](const std::vector<double>& a, double c, const std::vector<double>& b) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + c * b[i];
    return r;
  };

  GeodesicPath path;
  std::vector<double> s(2 * m);
  std::copy(p.begin(), p.end(), s.begin());
  std::copy(v.begin(), v.end(), s.begin() + static_cast<long>(m));
  auto record = [&](double t) {
    path.t.push_back(t);
    path.x.emplace_back(s.begin(), s.begin() + static_cast<long>(m));
    path.v.emplace_back(s.begin() + static_cast<long>(m), s.end());
  };
  record(0.0);

  const double dt = t_end / steps;
  for (int n = 0; n < steps; ++n) {
    std::vector<double> next;
    try {
      const auto k1 = rhs(s);
      const auto k2 = rhs(axpy(s, dt / 2, k1));
      const auto k3 = rhs(axpy(s, dt / 2, k2));
      const auto k4 = rhs(axpy(s, dt, k3));
      next = s;
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    } catch (const DomainError&) {
      path.left_domain = true;
      break;
    }
    if (!w.domain().contains(std::span<const double>(next.data(), m))) {
      path.left_domain = true;
      break;
    }
    s = std::move(next);
    record(dt * (n + 1));
  }
  return path;
}

}  // namespace divweb
