#include <cmath>
#include <random>

#include "doctest.h"
#include "divweb/error.hpp"
#include "divweb/normalform.hpp"

using namespace divweb;

namespace {

const std::vector<std::string> kXY = {"x", "y"};
const std::vector<std::string> kXYZ = {"x", "y", "z"};

Expr ex(std::string_view s, const std::vector<std::string>& vars) { return parse_expr(s, vars); }

WebChart chart(const std::vector<std::string>& vars, std::vector<int> blocks, std::string_view h, double half) {
  std::vector<double> lo(vars.size(), -half), hi(vars.size(), half);
  return WebChart::parse(vars, std::move(blocks), h, Box(lo, hi));
}

}  // namespace

TEST_CASE("boundary data validation") {
  const BlockFrame f{kXY, {1, 1}};
  CHECK(BoundaryData{{ex("2 + x", kXY), ex("2*exp(y)", kXY)}}.validate(f) == doctest::Approx(2.0));
  CHECK_THROWS_AS((BoundaryData{{ex("1 + x", kXY), ex("2", kXY)}}.validate(f)), PreconditionError);
  CHECK_THROWS_AS((BoundaryData{{ex("1 + x*y", kXY), ex("1", kXY)}}.validate(f)), PreconditionError);
  CHECK_THROWS_AS((BoundaryData{{ex("1", kXY)}}.validate(f)), PreconditionError);
  CHECK_THROWS_AS((BoundaryData{{ex("-1 + x", kXY), ex("-1", kXY)}}.validate(f)), PreconditionError);

  const WebChart w = chart(kXYZ, {2, 1}, "(1 + x + y*z)*exp(x*y + z)", 0.3);
  const BoundaryData bd = BoundaryData::from_density(w);
  REQUIRE(bd.per_block.size() == 2);
  const double p[3] = {0.2, -0.1, 0.25};
  CHECK(eval(bd.per_block[0], p) == doctest::Approx((1 + 0.2) * std::exp(-0.02)));
  CHECK(eval(bd.per_block[1], p) == doctest::Approx(std::exp(0.25)));
}

TEST_CASE("tensor admissibility") {
  const Box box({-1, -1, -1}, {1, 1, 1});
  const BlockFrame codim1{kXYZ, {1, 1, 1}};
  auto full = [&](std::vector<std::vector<std::string>> rows) {
    std::vector<std::vector<Expr>> A;
    for (const auto& r : rows) {
      A.emplace_back();
      for (const auto& s : r) A.back().push_back(ex(s, kXYZ));
    }
    return A;
  };

  SUBCASE("tensor of a density") {
    const WebChart w = chart(kXYZ, {1, 1, 1}, "exp(x*y + y*z + x*y*z)", 1);
    CHECK(check_tensor_admissible(nonuniformity_tensor(w), codim1, box).admissible);
    const WebChart v = chart(kXYZ, {2, 1}, "1 + 0.2*x*z + 0.1*y*y*z", 1);
    CHECK(check_tensor_admissible(nonuniformity_tensor(v), BlockFrame::of(v), box).admissible);
  }
  SUBCASE("asymmetric") {
    const auto v = check_tensor_admissible(full({{"0", "x", "0"}, {"y", "0", "0"}, {"0", "0", "0"}}), codim1, box);
    CHECK_FALSE(v.admissible);
    CHECK(v.condition == 1);
    CHECK(v.indices == std::vector<int>{0, 1});
    CHECK(v.magnitude > 0.5);
  }
  SUBCASE("same block entry") {
    const BlockFrame f{kXYZ, {2, 1}};
    const auto v = check_tensor_admissible(full({{"0", "x", "0"}, {"x", "0", "0"}, {"0", "0", "0"}}), f, box);
    CHECK_FALSE(v.admissible);
    CHECK(v.condition == 2);
    CHECK(v.indices == std::vector<int>{0, 1});
  }
  SUBCASE("compatibility") {
    // A_13 = y: d/dy A_13 = 1 but d/dx A_23 = 0.
    const auto v = check_tensor_admissible(full({{"0", "0", "y"}, {"0", "0", "0"}, {"y", "0", "0"}}), codim1, box);
    CHECK_FALSE(v.admissible);
    CHECK(v.condition == 3);
    CHECK(v.indices == std::vector<int>{0, 1, 2});
    CHECK(v.magnitude == doctest::Approx(1.0));
    CHECK(v.point.size() == 3);
  }
  SUBCASE("compatibility holds for exact mixed partials") {
    // A = Hessian of x*y*z off the diagonal.
    const auto v = check_tensor_admissible(full({{"0", "z", "y"}, {"z", "0", "x"}, {"y", "x", "0"}}), codim1, box);
    CHECK(v.admissible);
  }
}

TEST_CASE("uniform axes contain zero") {
  const auto axes = uniform_axes(Box({-0.5, -0.3}, {0.5, 0.7}), 11);
  REQUIRE(axes.size() == 2);
  CHECK(axes[0][5] == 0.0);
  CHECK(axes[1][3] == 0.0);
  CHECK(axes[1].back() == doctest::Approx(0.7));
  CHECK_THROWS_AS(uniform_axes(Box({0.1}, {1}), 5), PreconditionError);
}

TEST_CASE("reconstruction from a prescribed tensor") {
  // A_12 = 1 with unit boundary data is the tensor of exp(xy).
  const BlockFrame f{kXY, {1, 1}};
  SymTensorField A(2);
  A.set(0, 1, Expr::constant(1.0));
  const auto axes = uniform_axes(Box({-1, -1}, {1, 1}), 9);
  const DensityGrid g = reconstruct_density(A, BoundaryData{{Expr::constant(1), Expr::constant(1)}}, f, axes);
  double worst = 0;
  for (std::size_t t = 0; t < g.size(); ++t) {
    const auto p = g.point(t);
    worst = std::max(worst, std::fabs(g.values[t] / std::exp(p[0] * p[1]) - 1));
  }
  CHECK(worst < 1e-12);

  // Same tensor, boundary data 2 + x and 2 + y: h = (2 + x)(2 + y) e^{xy} / 2.
  const DensityGrid g2 = reconstruct_density(A, BoundaryData{{ex("2 + x", kXY), ex("2 + y", kXY)}}, f, axes);
  worst = 0;
  for (std::size_t t = 0; t < g2.size(); ++t) {
    const auto p = g2.point(t);
    worst = std::max(worst, std::fabs(g2.values[t] / ((2 + p[0]) * (2 + p[1]) * std::exp(p[0] * p[1]) / 2) - 1));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("reconstruction round trips") {
  const QuadratureSpec spec;
  SUBCASE("planar") {
    const WebChart w = chart(kXY, {1, 1}, "1 + x*y", 0.5);
    const auto axes = uniform_axes(w.domain(), 17);
    CHECK(roundtrip_error(w, axes, spec).max_rel_error < 1e-10);
  }
  SUBCASE("three singleton blocks") {
    const WebChart w = chart(kXYZ, {1, 1, 1}, "exp(x*y + y*z)*(1 + 0.3*x*z)", 0.5);
    const auto axes = uniform_axes(w.domain(), 9);
    const RoundTrip first = roundtrip_error(w, axes, spec, PairRule::kFirst);
    CHECK(first.max_rel_error < 1e-10);
    CHECK(first.worst_point.size() == 3);
  }
  SUBCASE("block of size two") {
    const WebChart w = chart(kXYZ, {2, 1}, "1 + x*z + 0.5*y*y*z + x*y", 0.4);
    const auto axes = uniform_axes(w.domain(), 9);
    CHECK(roundtrip_error(w, axes, spec).max_rel_error < 1e-10);
  }
}

TEST_CASE("reconstruction is independent of the pair order") {
  const WebChart w = chart(kXYZ, {1, 1, 1}, "sqrt(2 + x*y*z + sin(x + y)*z)", 0.5);
  const auto axes = uniform_axes(w.domain(), 7);
  const SymTensorField A = nonuniformity_tensor(w);
  const BoundaryData bd = BoundaryData::from_density(w);
  const BlockFrame f = BlockFrame::of(w);
  const DensityGrid a = reconstruct_density(A, bd, f, axes, {}, PairRule::kFirst);
  const DensityGrid b = reconstruct_density(A, bd, f, axes, {}, PairRule::kLast);
  double worst = 0;
  for (std::size_t t = 0; t < a.size(); ++t) worst = std::max(worst, std::fabs(a.values[t] / b.values[t] - 1));
  CHECK(worst < 1e-8);
}

TEST_CASE("reconstruction rejects bad intermediates") {
  const BlockFrame f{kXY, {1, 1}};
  SymTensorField A(2);
  const auto axes = uniform_axes(Box({-0.5, -0.5}, {0.5, 0.5}), 5);
  CHECK_THROWS_AS(reconstruct_density(A, BoundaryData{{ex("1 - 4*x", kXY), ex("1", kXY)}}, f, axes), NumericError);
  std::vector<std::vector<double>> no_zero = {{0.1, 0.2}, {0.0, 0.1}};
  CHECK_THROWS_AS(reconstruct_density(A, BoundaryData{{ex("1", kXY), ex("1", kXY)}}, f, no_zero), PreconditionError);
}

TEST_CASE("normalized chart") {
  SUBCASE("separable unit origin") {
    const WebChart w = chart(kXY, {1, 1}, "(1 + x)*(1 + y)", 0.5);
    const NormalizedChart n(w);
    const double p[2] = {0.3, -0.4};
    const auto y = n.forward(p);
    CHECK(y[0] == doctest::Approx(0.3 + 0.045).epsilon(1e-13));
    CHECK(y[1] == doctest::Approx(-0.4 + 0.08).epsilon(1e-13));
    CHECK(n.density_at_source(p) == doctest::Approx(1.0).epsilon(1e-14));
    const auto back = n.inverse(y);
    CHECK(back[0] == doctest::Approx(0.3).epsilon(1e-11));
    CHECK(back[1] == doctest::Approx(-0.4).epsilon(1e-11));
  }
  SUBCASE("h(0) = 2") {
    const WebChart w = chart(kXY, {1, 1}, "(1 + x)*(1 + y) + 1", 0.5);
    const NormalizedChart n(w);
    const double p[2] = {0.3, -0.4};
    const auto y = n.forward(p);
    CHECK(y[0] == doctest::Approx(2 * 0.3 + 0.045).epsilon(1e-13));
    CHECK(y[1] == doctest::Approx(-0.4 + 0.04).epsilon(1e-13));
    CHECK(n.jacobian(p) == doctest::Approx(2.3 * 1.6 / 2));
  }
  SUBCASE("cross, inverse and Jacobian in 3D") {
    const WebChart w = chart(kXYZ, {2, 1}, "(2 + sin(x) + y*y)*exp(0.5*z + x*z) + 0.2*y*z*z", 0.5);
    const NormalizedChart n(w);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-0.45, 0.45);
    double cross = 0, inv = 0, jac = 0;
    for (int t = 0; t < 40; ++t) {
      // A point of the new chart on the cross: one block nonzero.
      std::vector<double> y = {u(rng), u(rng), u(rng)};
      if (t % 2 == 0)
        y[2] = 0;
      else
        y[0] = y[1] = 0;
      y[0] *= 0.5;
      cross = std::max(cross, std::fabs(n.density(y) - 1));

      const std::vector<double> x = {u(rng), u(rng), u(rng)};
      const auto back = n.inverse(n.forward(x));
      for (int k = 0; k < 3; ++k) inv = std::max(inv, std::fabs(back[static_cast<std::size_t>(k)] - x[static_cast<std::size_t>(k)]));

      // Central differences of the forward map; it is triangular per block.
      const double e = 1e-5;
      std::vector<double> xp = x, xm = x;
      double det = 1;
      for (std::size_t k : {std::size_t{0}, std::size_t{2}}) {
        xp[k] += e;
        xm[k] -= e;
        det *= (n.forward(xp)[k] - n.forward(xm)[k]) / (2 * e);
        xp[k] = xm[k] = x[k];
      }
      jac = std::max(jac, std::fabs(det / n.jacobian(x) - 1));
    }
    CHECK(cross < 1e-9);
    CHECK(inv < 1e-10);
    CHECK(jac < 1e-6);
  }
  SUBCASE("origin required") {
    const WebChart w = WebChart::parse(kXY, {1, 1}, "1", Box({0.1, 0.1}, {1, 1}));
    CHECK_THROWS_AS(NormalizedChart{w}, PreconditionError);
  }
}

TEST_CASE("planar invariants") {
  const WebChart w = chart(kXY, {1, 1}, "exp(x*y + x*x*y/2 + x*y*y/2)", 0.5);
  const PlanarInvariants at0 = planar_invariants(w, std::vector<double>{0, 0});
  CHECK(at0.kappa0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(at0.a == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(at0.generic);

  // 1 + xy: κ = 1/h², so κ_x = -2y/h³ vanishes at 0.
  const WebChart flat = chart(kXY, {1, 1}, "1 + x*y", 0.5);
  const PlanarInvariants f0 = planar_invariants(flat, std::vector<double>{0, 0});
  CHECK(f0.kappa0 == doctest::Approx(1.0));
  CHECK(f0.a == 0.0);
  CHECK_FALSE(f0.generic);

  CHECK_THROWS_AS(planar_invariants(chart(kXYZ, {1, 1, 1}, "1", 1), std::vector<double>{0, 0, 0}),
                  PreconditionError);
}

TEST_CASE("planar invariants under (x, y) -> (c x, y / c)") {
  const std::string h = "(1 + 0.3*x + 0.2*y*y)*exp(x*y + 0.4*x*x*y) + 0.1*sin(x*y*y)";
  const WebChart w = chart(kXY, {1, 1}, h, 0.5);
  for (double c : {1.7, 0.35}) {
    // h₂(X, Y) = h(X / c, c Y) has unit Jacobian.
    const Expr h2 = substitute(w.density(), std::vector<std::optional<Expr>>{
                                                build::div(Expr::variable("x", 0), Expr::constant(c)),
                                                build::mul(Expr::constant(c), Expr::variable("y", 1))});
    const WebChart w2(kXY, {1, 1}, h2, Box({-0.5 * c, -0.5 / c}, {0.5 * c, 0.5 / c}));
    for (const auto& p : std::vector<std::vector<double>>{{0, 0}, {0.2, -0.1}, {-0.3, 0.25}, {0.1, 0.4}}) {
      const PlanarInvariants a = planar_invariants(w, p);
      const PlanarInvariants b = planar_invariants(w2, std::vector<double>{c * p[0], p[1] / c});
      CHECK(b.kappa0 == doctest::Approx(a.kappa0).epsilon(1e-10));
      CHECK(b.a == doctest::Approx(a.a).epsilon(1e-10));
    }
  }
}

TEST_CASE("canonical form report") {
  SUBCASE("already canonical") {
    const WebChart w = chart(kXY, {1, 1}, "exp(x*y + x*x*y/2 + x*y*y/2)", 0.5);
    const CanonicalFormReport r = canonical_form_report(w);
    CHECK(r.quarter_turns == 0);
    CHECK(r.scale == doctest::Approx(1.0));
    CHECK(r.jet_matches);
    CHECK(r.remainder_consistent);
    CHECK(r.jet.at("h_xxy") == doctest::Approx(1.0));
  }
  SUBCASE("needs rotation and rescaling") {
    // κ = 0.5 − 2x + 0.5y near 0: three quarter-turns give slopes (0.5, 2), then c = 1/2.
    const WebChart w = chart(kXY, {1, 1}, "exp(0.5*x*y - x*x*y + 0.25*x*y*y)", 0.5);
    const CanonicalFormReport r = canonical_form_report(w);
    CHECK(r.quarter_turns == 3);
    CHECK(r.scale == doctest::Approx(0.5));
    CHECK(r.invariants.a == doctest::Approx(1.0));
    CHECK(r.kappa0_canonical == doctest::Approx(-0.5));
    CHECK(r.jet_matches);
    CHECK(r.jet.at("h_xy") == doctest::Approx(-0.5));
    CHECK(r.jet.at("h_xyy") == doctest::Approx(1.0));
    CHECK(r.remainder_consistent);
    REQUIRE(r.remainder.size() == 3);
    CHECK(r.remainder[0] / r.remainder[1] > 12);
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(canonical_form_report(chart(kXY, {1, 1}, "(1 + x)*(1 + y)", 0.5)), PreconditionError);
    CHECK_THROWS_AS(canonical_form_report(chart(kXY, {1, 1}, "1 + x*y + x*x*y", 0.5)), PreconditionError);
    CHECK_THROWS_AS(canonical_form_report(chart(kXY, {1, 1}, "1 + x*y", 0.5)), PreconditionError);
  }
}
