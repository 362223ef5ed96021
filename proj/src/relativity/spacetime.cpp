#include <cmath>
#include <sstream>

#include "divweb/error.hpp"
#include "divweb/relativity.hpp"

namespace divweb {

namespace {

std::string literal(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

double mass_param(const std::string& name, const std::map<std::string, double>& params) {
  for (const auto& [key, value] : params)
    if (key != "m") throw PreconditionError("spacetime " + name + " has no parameter '" + key + "'");
  const auto it = params.find("m");
  if (it == params.end()) throw PreconditionError("spacetime " + name + " needs parameter m");
  if (!(it->second > 0)) throw PreconditionError("spacetime " + name + " needs m > 0, got " + literal(it->second));
  return it->second;
}

void no_params(const std::string& name, const std::map<std::string, double>& params) {
  if (!params.empty()) throw PreconditionError("spacetime " + name + " takes no parameters");
}

SplitMetric diagonal(std::vector<std::string> coords, const std::string& lapse, const std::array<std::string, 3>& diag) {
  SplitMetric gm;
  gm.coordinates = std::move(coords);
  gm.lapse = simplify(parse_expr(lapse, gm.coordinates));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) gm.gamma[i][j] = Expr::constant(0.0);
    gm.gamma[i][i] = simplify(parse_expr(diag[i], gm.coordinates));
  }
  return gm;
}

}  // namespace

void SplitMetric::validate(const Box& domain, int samples) const {
  if (coordinates.size() != 4) throw PreconditionError("split metric needs 4 coordinates");
  if (domain.dim() != 4) throw PreconditionError("split metric domain must be 4-dimensional");
  auto points = halton_points(domain, samples);
  points.push_back(domain.center());
  for (const auto& p : points) {
    auto fail = [&](const std::string& what) {
      throw PreconditionError(what + " at " + format_point(p));
    };
    if (!(eval(lapse, p) > 0)) fail("lapse is not positive");
    double g[3][3];
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) g[i][j] = eval(gamma[i][j], p);
    const double m1 = g[0][0];
    const double m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    const double m3 = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
                      g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
                      g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    if (!(m1 > 0 && m2 > 0 && m3 > 0)) fail("spatial metric is not positive definite");
  }
}

SplitMetric from_full_metric(std::vector<std::string> coordinates, const std::array<std::array<Expr, 4>, 4>& g) {
  if (coordinates.size() != 4) throw PreconditionError("full metric needs 4 coordinates");
  for (std::size_t k = 1; k < 4; ++k)
    for (const Expr& e : {g[0][k], g[k][0]})
      if (!simplify(e).is_constant(0.0))
        throw PreconditionError("metric has a shift term dt d" + coordinates[k] + " = " + to_string(e) +
                                "; transform to normal coordinates first");
  SplitMetric gm;
  gm.coordinates = std::move(coordinates);
  gm.lapse = simplify(build::fn(Op::kSqrt, build::neg(g[0][0])));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      gm.gamma[i][j] = simplify(g[i + 1][j + 1]);
      if (j < i && !structurally_equal(gm.gamma[i][j], gm.gamma[j][i]))
        throw PreconditionError("spatial metric is not symmetric");
    }
  return gm;
}

Expr determinant3(const std::array<std::array<Expr, 3>, 3>& a) {
  auto minor = [&](std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
    return build::sub(build::mul(a[r0][c0], a[r1][c1]), build::mul(a[r0][c1], a[r1][c0]));
  };
  Expr det = build::mul(a[0][0], minor(1, 2, 1, 2));
  det = build::sub(det, build::mul(a[0][1], minor(1, 2, 0, 2)));
  det = build::add(det, build::mul(a[0][2], minor(1, 2, 0, 1)));
  return simplify(det);
}

Expr volume_density(const SplitMetric& gm) {
  return simplify(build::mul(gm.lapse, build::fn(Op::kSqrt, determinant3(gm.gamma))));
}

WebChart web_from_metric(const SplitMetric& gm, const Box& domain) {
  gm.validate(domain);
  return WebChart(gm.coordinates, {1, 3}, volume_density(gm), domain);
}

SlicingReport slicing_report(const SplitMetric& gm, const Box& domain) {
  const WebChart w = web_from_metric(gm, domain);
  const SymTensorField K = nonuniformity_tensor(w);
  SlicingReport out;
  out.density = w.density();
  for (int k = 0; k < 3; ++k) out.kappa[static_cast<std::size_t>(k)] = K(0, k + 1);
  out.triviality = is_locally_trivial(w);
  out.geodesic_slicing = true;
  for (int k = 1; k < 4; ++k)
    if (!is_identically_zero(simplify(differentiate(gm.lapse, k)), domain).is_zero()) out.geodesic_slicing = false;
  out.conservation_simplifies = out.triviality.trivial;
  return out;
}

std::vector<std::string> builtin_spacetime_names() { return {"minkowski", "schwarzschild_radial", "lemaitre"}; }

SplitMetric builtin_spacetime(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "minkowski") {
    no_params(name, params);
    return diagonal({"t", "x", "y", "z"}, "1", {"1", "1", "1"});
  }
  if (name == "schwarzschild_radial") {
    const std::string m = literal(mass_param(name, params));
    const std::string f = "(1 - 2*" + m + "/r)";
    return diagonal({"t", "r", "theta", "phi"}, "sqrt" + f, {"1/" + f, "r^2", "r^2*sin(theta)^2"});
  }
  if (name == "lemaitre") {
    const std::string m = literal(mass_param(name, params));
    const std::string r = "((1.5*(R - sqrt(2*" + m + ")*T))^(2/3))";
    return diagonal({"T", "R", "theta", "phi"}, "1", {"1/" + r, r + "^2", r + "^2*sin(theta)^2"});
  }
  throw PreconditionError("unknown spacetime '" + name + "' (known: minkowski, schwarzschild_radial, lemaitre)");
}

Box builtin_domain(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "minkowski") {
    no_params(name, params);
    return Box({-1, -1, -1, -1}, {1, 1, 1, 1});
  }
  if (name == "schwarzschild_radial") {
    const double m = mass_param(name, params);
    return Box({-1, 3 * m, 0.3, 0}, {1, 10 * m, 2.8, 6});
  }
  if (name == "lemaitre") {
    // R − sqrt(2m) T stays >= 1 for |T| <= 1/2.
    const double c = std::sqrt(2 * mass_param(name, params));
    return Box({-0.5, 0.5 * c + 1, 0.3, 0}, {0.5, 0.5 * c + 3, 2.8, 6});
  }
  throw PreconditionError("unknown spacetime '" + name + "' (known: minkowski, schwarzschild_radial, lemaitre)");
}

PainlevePullback painleve_pullback(double m) {
  const std::map<std::string, double> params{{"m", m}};
  const SplitMetric gm = builtin_spacetime("lemaitre", params);
  const WebChart w = web_from_metric(gm, builtin_domain("lemaitre", params));
  const Expr kappa = nonuniformity_tensor(w)(0, 1);
  const std::vector<std::string> gp = {"T", "r", "theta", "phi"};
  const Expr R = parse_expr("(2/3)*r^(3/2) + sqrt(2*" + literal(m) + ")*T", gp);
  std::vector<std::optional<Expr>> rep(4);
  rep[1] = R;
  const Expr k = substitute(kappa, rep);
  return {simplify(build::mul(k, simplify(differentiate(R, 0)))), simplify(build::mul(k, simplify(differentiate(R, 1))))};
}

}  // namespace divweb
