#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "divweb/error.hpp"
#include "divweb/normalform.hpp"
#include "divweb/roots.hpp"

namespace divweb {

namespace {

std::vector<double> origin_of(const WebChart& w) { return std::vector<double>(static_cast<std::size_t>(w.dim()), 0.0); }

void require_origin(const WebChart& w) {
  if (!w.domain().contains(origin_of(w))) throw PreconditionError("chart domain does not contain the origin");
}

void require_planar(const WebChart& w) {
  if (w.dim() != 2 || w.block_count() != 2) throw PreconditionError("planar 3-web invariants need a 2-D chart with two axes");
}

}  // namespace

NormalizedChart::NormalizedChart(const WebChart& w, QuadratureSpec spec) : web_(w), spec_(spec) {
  validate(spec_);
  require_origin(w);
  h0_ = w.h(origin_of(w));
}

double NormalizedChart::leading_integral(std::span<const double> x, int block) const {
  std::vector<double> y(x.size(), 0.0);
  for (int k = web_.block_begin(block); k < web_.block_end(block); ++k)
    y[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
  const auto lead = static_cast<std::size_t>(web_.block_begin(block));
  auto g = [&](double t) {
    y[lead] = t;
    return web_.h(y) / h0_;
  };
  return integrate_1d(g, 0.0, x[lead], spec_).value;
}

double NormalizedChart::block_factor(std::span<const double> x, int block) const {
  std::vector<double> y(x.size(), 0.0);
  for (int k = web_.block_begin(block); k < web_.block_end(block); ++k)
    y[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
  return web_.h(y) / h0_;
}

std::vector<double> NormalizedChart::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != web_.dim()) throw PreconditionError("point dimension differs from chart dimension");
  std::vector<double> y(x.begin(), x.end());
  for (int i = 0; i < web_.block_count(); ++i)
    y[static_cast<std::size_t>(web_.block_begin(i))] = leading_integral(x, i);
  y[0] *= h0_;
  return y;
}

double NormalizedChart::jacobian(std::span<const double> x) const {
  double J = h0_;
  for (int i = 0; i < web_.block_count(); ++i) J *= block_factor(x, i);
  return J;
}

std::vector<double> NormalizedChart::inverse(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != web_.dim()) throw PreconditionError("point dimension differs from chart dimension");
  std::vector<double> x(y.begin(), y.end());
  for (int i = 0; i < web_.block_count(); ++i) {
    const auto lead = static_cast<std::size_t>(web_.block_begin(i));
    const double target = lead == 0 ? y[0] / h0_ : y[lead];
    if (target == 0.0) {
      x[lead] = 0.0;
      continue;
    }
    const double limit = target > 0 ? web_.domain().hi[lead] : web_.domain().lo[lead];
    auto f = [&](double s) {
      x[lead] = s;
      const double F = leading_integral(x, i);
      return std::make_pair(F - target, block_factor(x, i));
    };
    if ((f(limit).first > 0) != (target > 0) && f(limit).first != 0.0) {
      std::ostringstream msg;
      msg << "point " << format_point(y) << " is outside the image of the chart domain";
      throw NumericError(msg.str());
    }
    RootOptions opt;
    opt.f_tol = 4 * spec_.abs_tol + 1e-15 * std::fabs(target);
    x[lead] = newton_bisect(f, 0.0, limit, opt).x;
  }
  return x;
}

PlanarInvariants planar_invariants(const WebChart& w, std::span<const double> p) {
  require_planar(w);
  const Expr kappa = nonuniformity_tensor(w)(0, 1);
  const Expr& h = w.density();
  const double hv = w.h(p), k = eval(kappa, p);
  PlanarInvariants out;
  out.kappa0 = k / hv;
  out.factor_x = hv * eval(differentiate(kappa, 0), p) - eval(differentiate(h, 0), p) * k;
  out.factor_y = hv * eval(differentiate(kappa, 1), p) - eval(differentiate(h, 1), p) * k;
  out.a = std::sqrt(std::fabs(out.factor_x * out.factor_y / std::pow(hv, 5)));
  out.generic = std::fabs(out.factor_x) > kGenericityThreshold && std::fabs(out.factor_y) > kGenericityThreshold;
  return out;
}

bool is_normalized(const WebChart& w, double tol, int samples) {
  require_origin(w);
  std::vector<double> x = origin_of(w);
  for (int k = 0; k < w.dim(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    for (int t = 0; t < samples; ++t) {
      x[uk] = w.domain().lo[uk] + (w.domain().hi[uk] - w.domain().lo[uk]) * t / std::max(1, samples - 1);
      if (!(std::fabs(w.h(x) - 1.0) <= tol)) return false;
    }
    x[uk] = 0.0;
  }
  return true;
}

CanonicalFormReport canonical_form_report(const WebChart& w, double tol) {
  require_planar(w);
  if (!is_normalized(w)) throw PreconditionError("chart is not normalized: h differs from 1 on the axes");
  const std::vector<double> zero = origin_of(w);
  CanonicalFormReport out;
  out.invariants = planar_invariants(w, zero);
  if (!out.invariants.generic) {
    std::ostringstream msg;
    msg << "web is not generic at 0: factors " << out.invariants.factor_x << ", " << out.invariants.factor_y;
    throw PreconditionError(msg.str());
  }

  // (x, y) -> (y, -x) maps (κ_x, κ_y) to (-κ_y, κ_x) and κ to -κ.
  double kx = out.invariants.factor_x, ky = out.invariants.factor_y;
  Expr h = w.density();
  const Expr X = Expr::variable(w.variables()[0], 0), Y = Expr::variable(w.variables()[1], 1);
  while (!(kx > 0 && ky > 0)) {
    const double t = kx;
    kx = -ky;
    ky = t;
    std::vector<std::optional<Expr>> rot{build::neg(Y), X};
    h = substitute(h, rot);
    ++out.quarter_turns;
  }
  out.scale = std::sqrt(kx / ky);
  std::vector<std::optional<Expr>> sc{build::div(X, Expr::constant(out.scale)),
                                      build::mul(Expr::constant(out.scale), Y)};
  h = simplify(substitute(h, sc));
  out.kappa0_canonical = out.quarter_turns % 2 == 0 ? out.invariants.kappa0 : -out.invariants.kappa0;

  const double k0 = out.kappa0_canonical, a = out.invariants.a;
  struct JetTerm {
    const char* name;
    int nx, ny;
    double expected;
  };
  const JetTerm terms[] = {{"h", 0, 0, 1.0},    {"h_x", 1, 0, 0.0},   {"h_y", 0, 1, 0.0},   {"h_xx", 2, 0, 0.0},
                           {"h_xy", 1, 1, k0},  {"h_yy", 0, 2, 0.0},  {"h_xxx", 3, 0, 0.0}, {"h_xxy", 2, 1, a},
                           {"h_xyy", 1, 2, a},  {"h_yyy", 0, 3, 0.0}};
  out.jet_matches = true;
  for (const auto& t : terms) {
    Expr d = h;
    for (int r = 0; r < t.nx; ++r) d = simplify(differentiate(d, 0));
    for (int r = 0; r < t.ny; ++r) d = simplify(differentiate(d, 1));
    const double v = eval(d, zero);
    out.jet[t.name] = v;
    if (!(std::fabs(v - t.expected) <= tol * std::max(1.0, std::fabs(t.expected)))) out.jet_matches = false;
  }

  double room = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < 2; ++k) room = std::min({room, -w.domain().lo[k], w.domain().hi[k]});
  const double r0 = std::min(0.1, 0.5 * room / std::max(out.scale, 1.0 / out.scale));
  constexpr int kDirections = 16;
  for (int level = 0; level < 3; ++level) {
    const double r = r0 / std::pow(2.0, level);
    double worst = 0;
    for (int d = 0; d < kDirections; ++d) {
      const double th = 2 * std::numbers::pi * d / kDirections;
      const double p[2] = {r * std::cos(th), r * std::sin(th)};
      const double jet = 1 + k0 * p[0] * p[1] + 0.5 * a * (p[0] * p[0] * p[1] + p[0] * p[1] * p[1]);
      worst = std::max(worst, std::fabs(eval(h, p) - jet));
    }
    out.remainder_radii.push_back(r);
    out.remainder.push_back(worst);
  }
  out.remainder_consistent = true;
  for (std::size_t t = 1; t < out.remainder.size(); ++t)
    if (out.remainder[t] > 1e-13 && out.remainder[t - 1] < 10 * out.remainder[t]) out.remainder_consistent = false;
  return out;
}

}  // namespace divweb
