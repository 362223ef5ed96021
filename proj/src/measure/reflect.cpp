#include <cmath>
#include <sstream>

#include "divweb/error.hpp"
#include "divweb/measure.hpp"
#include "divweb/roots.hpp"

namespace divweb {

namespace {

// Volumes of ⟨p, q⟩ with coordinate i replaced, divided by Π_{k≠i} u_k:
//   V(s) = ∫_0^s f(σ) dσ,  f(σ) = ∫_{[0,1]^{m-1}} h(p + (t_1 u_1, .., σ, .., t_m u_m)) dt.
class FiberVolume {
 public:
  FiberVolume(const WebChart& w, std::span<const double> p, int i, std::span<const double> q,
              const QuadratureSpec& spec)
      : w_(w), p_(p.begin(), p.end()), u_(q.size()), i_(static_cast<std::size_t>(i)), spec_(spec),
        x_(p.size()) {
    for (std::size_t k = 0; k < u_.size(); ++k) u_[k] = q[k] - p[k];
  }

  double volume(double s) const {
    if (s == 0.0) return 0.0;
    const std::size_t m = p_.size();
    std::vector<double> a(m, 0.0), b(m, 1.0);
    b[i_] = s;
    auto f = [&](std::span<const double> t) {
      for (std::size_t k = 0; k < m; ++k) x_[k] = p_[k] + (k == i_ ? t[k] : t[k] * u_[k]);
      return w_.h(x_);
    };
    return integrate_box(f, a, b, spec_).value;
  }

  double fiber(double s) const {
    const std::size_t m = p_.size();
    if (m == 1) {
      x_[0] = p_[0] + s;
      return w_.h(x_);
    }
    std::vector<double> a(m - 1, 0.0), b(m - 1, 1.0);
    auto f = [&](std::span<const double> t) {
      for (std::size_t k = 0, n = 0; k < m; ++k) x_[k] = p_[k] + (k == i_ ? s : t[n++] * u_[k]);
      return w_.h(x_);
    };
    return integrate_box(f, a, b, spec_).value;
  }

 private:
  const WebChart& w_;
  std::vector<double> p_, u_;
  std::size_t i_;
  QuadratureSpec spec_;
  mutable std::vector<double> x_;
};

void check_point(const WebChart& w, std::span<const double> x, const char* what) {
  if (static_cast<int>(x.size()) != w.dim())
    throw PreconditionError(std::string(what) + " dimension differs from chart dimension");
  if (!w.domain().contains(x)) throw PreconditionError(std::string(what) + " " + format_point(x) + " outside domain");
}

}  // namespace

ReflectionResult reflect(const WebChart& w, std::span<const double> p, int i, std::span<const double> q,
                         const ReflectionSpec& spec) {
  if (!w.is_codim1()) throw PreconditionError("reflections need a codimension-1 web (refine it first)");
  if (i < 0 || i >= w.dim()) throw PreconditionError("reflection axis out of range");
  check_point(w, p, "anchor");
  check_point(w, q, "point");
  validate(spec.quad);

  ReflectionResult out;
  out.image.assign(q.begin(), q.end());
  const auto ui = static_cast<std::size_t>(i);
  const double u = q[ui] - p[ui];
  if (u == 0.0) return out;

  const FiberVolume V(w, p, i, q, spec.quad);
  const double target = V.volume(u);
  auto g = [&](double s) { return target + V.volume(s); };
  auto g_and_slope = [&](double s) { return std::make_pair(g(s), V.fiber(s)); };

  const double limit = (u > 0 ? w.domain().lo[ui] : w.domain().hi[ui]) - p[ui];
  const auto bracket = expand_bracket(g, 0.0, -u, limit);
  if (!bracket) {
    std::ostringstream msg;
    msg << "no reflection of " << format_point(q) << " along axis " << i + 1 << " inside the domain (anchor "
        << format_point(p) << ")";
    throw NumericError(msg.str());
  }
  RootOptions opt;
  opt.f_tol = spec.rel_tol * std::fabs(target);
  opt.max_iterations = spec.max_iterations;
  const RootResult r = newton_bisect(g_and_slope, bracket->first, bracket->second, opt);
  out.image[ui] = p[ui] + r.x;
  out.iterations = r.iterations;
  out.residual = r.residual;
  out.tolerance = opt.f_tol;
  return out;
}

std::vector<double> loop(const WebChart& w, std::span<const double> p, int i, int j, std::span<const double> q,
                         const ReflectionSpec& spec) {
  if (i == j) throw PreconditionError("loop axes must differ");
  std::vector<double> x(q.begin(), q.end());
  const int axis[4] = {i, j, i, j};
  for (int stage = 0; stage < 4; ++stage) {
    try {
      x = reflect(w, p, axis[stage], x, spec).image;
    } catch (const NumericError& e) {
      throw NumericError("loop stage " + std::to_string(stage + 1) + ": " + e.what());
    } catch (const PreconditionError& e) {
      throw PreconditionError("loop stage " + std::to_string(stage + 1) + ": " + e.what());
    }
  }
  return x;
}

std::vector<double> holonomy_defect(const WebChart& w, std::span<const double> p, int i, int j,
                                    std::span<const double> q, const ReflectionSpec& spec) {
  std::vector<double> d = loop(w, p, i, j, q, spec);
  for (std::size_t k = 0; k < d.size(); ++k) d[k] -= q[k];
  return d;
}

std::array<double, 3> fit_linear(const std::vector<double>& s, const std::vector<double>& y) {
  const std::size_t n = s.size();
  if (n < 2 || y.size() != n) throw PreconditionError("linear fit needs at least two samples");
  double ms = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) ms += s[k], my += y[k];
  ms /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (s[k] - ms) * (s[k] - ms);
    sxy += (s[k] - ms) * (y[k] - my);
  }
  if (sxx == 0) throw PreconditionError("linear fit needs distinct abscissae");
  const double c1 = sxy / sxx, c0 = my - c1 * ms;
  double rss = 0;
  for (std::size_t k = 0; k < n; ++k) rss += std::pow(y[k] - c0 - c1 * s[k], 2);
  return {c0, c1, std::sqrt(rss / static_cast<double>(n))};
}

namespace {

void check_scales(const std::vector<double>& scales) {
  if (scales.size() < 2) throw PreconditionError("need at least two scales");
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (!(scales[k] > 0)) throw PreconditionError("scales must be positive");
    if (k && !(scales[k] < scales[k - 1])) throw PreconditionError("scales must be decreasing");
  }
}

// Noise in a ratio (difference of reflected coordinates) / s^power.
double ratio_noise(const ReflectionSpec& spec, double s, int reflections, int power) {
  return reflections * (spec.rel_tol * s + spec.quad.abs_tol) / std::pow(s, power);
}

}  // namespace

CurvatureFit fit_loop_curvature(const WebChart& w, std::span<const double> p, int i, int j,
                                const std::vector<double>& scales, const ReflectionSpec& spec) {
  check_scales(scales);
  CurvatureFit out;
  out.scales = scales;
  const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
  for (double s : scales) {
    std::vector<double> q(p.begin(), p.end());
    q[ui] += s;
    q[uj] += s;
    check_point(w, q, "loop start");
    const auto d = holonomy_defect(w, p, i, j, q, spec);
    out.ratios.push_back((d[ui] - d[uj]) / (2 * s * s * s));
  }
  const auto [c0, c1, rms] = fit_linear(scales, out.ratios);
  out.kappa_hat = c0;
  out.slope = c1;
  out.residual = rms;
  out.noise = ratio_noise(spec, scales.back(), 4, 3);
  out.ill_conditioned = out.noise > 1e-3 * std::max(1.0, std::fabs(c0));
  out.kappa = eval(nonuniformity_tensor(w)(i, j), p);
  return out;
}

TaylorCheck reflection_taylor_check(const WebChart& w, std::span<const double> p, int i, std::vector<double> scales,
                                    const ReflectionSpec& spec) {
  const int m = w.dim();
  const auto ui = static_cast<std::size_t>(i);
  check_point(w, p, "anchor");
  if (scales.empty()) {
    double room = 0.1;
    for (std::size_t k = 0; k < p.size(); ++k)
      room = std::min({room, 0.25 * (p[k] - w.domain().lo[k]), 0.25 * (w.domain().hi[k] - p[k])});
    for (int k = 0; k < 4; ++k) scales.push_back(room / (1 << k));
  }
  check_scales(scales);

  TaylorCheck out;
  out.scales = scales;
  const Expr& L = w.log_density();
  const Expr dL = differentiate(L, i);

  auto offset_image = [&](double s, int j, double sj) {
    std::vector<double> q(p.begin(), p.end());
    q[ui] += s;
    if (j >= 0) q[static_cast<std::size_t>(j)] += sj;
    return reflect(w, p, i, q, spec).image[ui] - p[ui];
  };
  auto record = [&](int j, double estimate, double symbolic) {
    TaylorCoefficient c{j, estimate, symbolic, std::fabs(estimate - symbolic) / std::max(std::fabs(symbolic), 1.0)};
    out.max_error = std::max(out.max_error, c.error);
    out.coefficients.push_back(c);
  };

  // (z + s) / s^2 = −α_i − α_i² s + O(s²)
  std::vector<double> y;
  for (double s : scales) y.push_back((offset_image(s, -1, 0) + s) / (s * s));
  record(-1, -fit_linear(scales, y)[0], eval(dL, p));

  // (z(s, s) − z(s, −s)) / (2 s³) = −α_ij / 2 + O(s)
  for (int j = 0; j < m; ++j) {
    if (j == i) continue;
    y.clear();
    for (double s : scales) y.push_back((offset_image(s, j, s) - offset_image(s, j, -s)) / (2 * s * s * s));
    record(j, -2 * fit_linear(scales, y)[0], eval(differentiate(dL, j), p));
  }
  return out;
}

}  // namespace divweb
