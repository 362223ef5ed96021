#include "divweb/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "divweb/error.hpp"

namespace divweb {

void validate(const QuadratureSpec& spec) {
  if (!(spec.abs_tol > 0.0)) throw PreconditionError("quadrature tolerance must be positive");
  if (spec.max_depth < 1) throw PreconditionError("quadrature depth must be at least 1");
  if (spec.order < 1) throw PreconditionError("quadrature order must be at least 1");
}

GaussLegendre::GaussLegendre(int order) : nodes(static_cast<std::size_t>(order)), weights(nodes.size()) {
  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

namespace {

struct Panel {
  const std::function<double(double)>& f;
  const GaussLegendre& rule;
  int max_depth;
  long evaluations = 0;
  double error = 0.0;

  double apply(double a, double b) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(mid + half * rule.nodes[k]);
    evaluations += static_cast<long>(rule.nodes.size());
    return half * s;
  }

  double adapt(double a, double b, double whole, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = apply(a, mid), right = apply(mid, b);
    const double diff = std::fabs(whole - (left + right));
    // Below a few ulps of the panel value further splitting cannot help.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (std::fabs(left) + std::fabs(right));
    if (diff <= tol || diff <= floor) {
      error += diff;
      return left + right;
    }
    if (depth >= max_depth) {
      std::ostringstream msg;
      msg << "quadrature did not converge on [" << a << ", " << b << "] at depth " << depth
          << " (estimate " << diff << ", tolerance " << tol << ")";
      throw NumericError(msg.str());
    }
    return adapt(a, mid, left, 0.5 * tol, depth + 1) + adapt(mid, b, right, 0.5 * tol, depth + 1);
  }
};

QuadResult integrate_with(const std::function<double(double)>& f, double a, double b, double tol,
                          const GaussLegendre& rule, int max_depth) {
  if (a == b) return {};
  Panel p{f, rule, max_depth};
  const double v = p.adapt(a, b, p.apply(a, b), tol, 1);
  return {v, p.error, p.evaluations};
}

}  // namespace

QuadResult integrate_1d(const std::function<double(double)>& f, double a, double b, const QuadratureSpec& spec) {
  validate(spec);
  const GaussLegendre rule(spec.order);
  return integrate_with(f, a, b, spec.abs_tol, rule, spec.max_depth);
}

QuadResult integrate_box(const BoxIntegrand& f, std::span<const double> a, std::span<const double> b,
                         const QuadratureSpec& spec) {
  validate(spec);
  const std::size_t m = a.size();
  if (b.size() != m) throw PreconditionError("integrate_box: corner dimensions differ");
  if (m == 0) return {f({}), 0.0, 1};
  const GaussLegendre rule(spec.order);
  const double share = spec.abs_tol / static_cast<double>(m);

  std::vector<double> x(m);
  std::vector<double> worst(m, 0.0);  // largest inner error seen per level
  long evaluations = 0;

  // level k integrates over axis k with axes < k frozen in x.
  std::function<double(std::size_t, double)> level = [&](std::size_t k, double outer_width) -> double {
    const double tol = share / outer_width;
    const double w = std::fabs(b[k] - a[k]);
    std::function<double(double)> g;
    if (k + 1 == m) {
      g = [&, k](double t) {
        x[k] = t;
        ++evaluations;
        return f(x);
      };
    } else {
      g = [&, k, w, outer_width](double t) {
        x[k] = t;
        return level(k + 1, outer_width * w);
      };
    }
    const QuadResult r = integrate_with(g, a[k], b[k], tol, rule, spec.max_depth);
    worst[k] = std::max(worst[k], r.error);
    return r.value;
  };

  QuadResult out;
  out.value = level(0, 1.0);
  double width = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    out.error += worst[k] * width;
    width *= std::fabs(b[k] - a[k]);
  }
  out.evaluations = evaluations;
  return out;
}

}  // namespace divweb
