#include <cmath>
#include <random>

#include "doctest.h"
#include "divweb/error.hpp"
#include "divweb/web.hpp"

using namespace divweb;

namespace {

WebChart planar(std::string_view h, double half = 0.5) {
  return WebChart::parse({"x", "y"}, {1, 1}, h, Box({-half, -half}, {half, half}));
}

std::vector<std::vector<double>> grid_points(const Box& b, int n) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      pts.push_back({b.lo[0] + (b.hi[0] - b.lo[0]) * (i + 0.5) / n, b.lo[1] + (b.hi[1] - b.lo[1]) * (j + 0.5) / n});
  return pts;
}

}  // namespace

TEST_CASE("chart validation") {
  CHECK_THROWS_AS(WebChart::parse({"x", "y"}, {1}, "1", Box({0, 0}, {1, 1})), PreconditionError);
  CHECK_THROWS_AS(WebChart::parse({"x", "y"}, {1, 1}, "x", Box({-1, -1}, {1, 1})), PreconditionError);
  CHECK_THROWS_AS(WebChart::parse({"x", "y"}, {1, 1}, "1", Box({1, 0}, {0, 1})), PreconditionError);
  const WebChart w = WebChart::parse({"x", "y", "z"}, {1, 2}, "1", Box({0, 0, 0}, {1, 1, 1}));
  CHECK(w.block_of(0) == 0);
  CHECK(w.block_of(2) == 1);
  CHECK(w.same_block(1, 2));
  CHECK(!w.is_codim1());
}

TEST_CASE("block layouts from index lists") {
  const BlockLayout l = layout_from_index_lists({{2}, {1, 3}}, 3);
  CHECK(l.order == std::vector<int>{1, 0, 2});
  CHECK(l.sizes == std::vector<int>{1, 2});
  CHECK(!l.is_identity());
  CHECK(layout_from_index_lists({{1}, {2, 3}}, 3).is_identity());
  CHECK_THROWS_AS(layout_from_index_lists({{1}, {1, 2}}, 2), PreconditionError);
  CHECK_THROWS_AS(layout_from_index_lists({{1}}, 2), PreconditionError);
  CHECK_THROWS_AS(layout_from_index_lists({{1}, {}}, 1), PreconditionError);
  CHECK_THROWS_AS(layout_from_index_lists({{1, 4}}, 3), PreconditionError);
}

TEST_CASE("nonuniformity tensor") {
  const WebChart w = planar("1 + x*y");
  const SymTensorField K = nonuniformity_tensor(w);
  CHECK(K(0, 0).is_constant(0.0));
  CHECK(K(1, 1).is_constant(0.0));
  for (const auto& p : grid_points(w.domain(), 7)) {
    const double s = 1 + p[0] * p[1];
    CHECK(eval(K(0, 1), p) == doctest::Approx(1 / (s * s)).epsilon(1e-13));
    CHECK(eval(K(1, 0), p) == eval(K(0, 1), p));
  }
  CHECK(nonuniformity_tensor(planar("3.5"))(0, 1).is_constant(0.0));
  const SymTensorField K2 = nonuniformity_tensor(planar("(1+x)*(1+y)*exp(x^2*y^2/4)"));
  for (const auto& p : grid_points(w.domain(), 7)) CHECK(eval(K2(0, 1), p) == doctest::Approx(p[0] * p[1]));

  // Same-block entries vanish for any density.
  const WebChart w3 = WebChart::parse({"x", "y", "z"}, {1, 2}, "exp(x*y + y*z + x*z)", Box({-1, -1, -1}, {1, 1, 1}));
  const SymTensorField K3 = nonuniformity_tensor(w3);
  CHECK(K3(1, 2).is_constant(0.0));
  CHECK(K3(1, 1).is_constant(0.0));
  CHECK(K3(0, 1).is_constant(1.0));
}

TEST_CASE("triviality verdicts") {
  const TrivialityVerdict t = is_locally_trivial(planar("(1+x)*exp(y)"));
  CHECK(t.trivial);
  CHECK(t.witness.empty());
  REQUIRE(t.entries.size() == 1);
  CHECK(t.entries[0].verdict.kind == ZeroKind::kSymbolicZero);

  const TrivialityVerdict n = is_locally_trivial(planar("1 + x*y"));
  CHECK(!n.trivial);
  CHECK(n.k == 0);
  CHECK(n.l == 1);
  REQUIRE(n.witness.size() == 2);
  CHECK(n.max_abs == doctest::Approx(1 / 0.5625));
  // The reported maximum is the value of κ at the witness.
  CHECK(eval(nonuniformity_tensor(planar("1 + x*y"))(0, 1), n.witness) == doctest::Approx(n.max_abs));

  // (1+x)(1+y) expanded: simplify cannot see the zero, sampling does.
  const TrivialityVerdict num = is_locally_trivial(planar("1 + x + y + x*y"));
  CHECK(num.trivial);
  CHECK(num.entries[0].verdict.kind == ZeroKind::kNumericallyZero);
}

TEST_CASE("trivializing map") {
  QuadratureSpec spec;
  SUBCASE("identity for h = 1") {
    const WebChart w = WebChart::parse({"x", "y", "z"}, {2, 1}, "1", Box({-1, -1, -1}, {1, 1, 1}));
    const TrivializingMap phi(w, spec);
    const std::vector<double> x = {0.3, -0.2, 0.7};
    const auto y = phi(x);
    for (int k = 0; k < 3; ++k) CHECK(y[static_cast<std::size_t>(k)] == doctest::Approx(x[static_cast<std::size_t>(k)]));
  }
  SUBCASE("separable density") {
    const WebChart w = planar("(1+x)*(1+y)");
    const TrivializingMap phi(w, spec);
    for (const auto& p : grid_points(w.domain(), 5)) {
      const auto y = phi(p);
      CHECK(y[0] == doctest::Approx(p[0] + p[0] * p[0] / 2).epsilon(1e-13));
      CHECK(y[1] == doctest::Approx(p[1] + p[1] * p[1] / 2).epsilon(1e-13));
    }
  }
  SUBCASE("polar chart, anchor off the origin") {
    const WebChart w = WebChart::parse({"r", "phi"}, {1, 1}, "r", Box({0.5, 0.0}, {2.0, 3.0}));
    const TrivializingMap phi(w, spec);
    CHECK(phi.anchor() == std::vector<double>{1.25, 1.5});
    // g_1 = r / sqrt(h(p)) and g_2 = h(p) / sqrt(h(p)).
    const double s = std::sqrt(1.25);
    const std::vector<double> x = {1.7, 0.4};
    const auto y = phi(x);
    CHECK(y[0] == doctest::Approx((1.7 * 1.7 - 1.25 * 1.25) / (2 * s)));
    CHECK(y[1] == doctest::Approx(s * (0.4 - 1.5)));
    CHECK_THROWS_AS(TrivializingMap(w, spec, std::vector<double>{0.1, 0.0}), PreconditionError);
  }
  SUBCASE("Jacobian determinant equals h at 200 points") {
    const WebChart w = WebChart::parse({"x", "y", "z"}, {1, 2}, "(2 + sin(x))*exp(y*z)*(1+z^2)",
                                       Box({-1, -1, -1}, {1, 1, 1}));
    const TrivializingMap phi(w, spec);
    double worst = 0;
    for (const auto& p : halton_points(Box({-0.9, -0.9, -0.9}, {0.9, 0.9, 0.9}), 200))
      worst = std::max(worst, std::fabs(phi.jacobian_determinant(p) / w.h(p) - 1));
    CHECK(worst < 1e-6);
  }
  CHECK_THROWS_AS(TrivializingMap(planar("1 + x*y"), spec), PreconditionError);
}

TEST_CASE("connection form") {
  for (const auto& b : connection_form(planar("1")))
    for (const auto& c : b) CHECK(c.is_constant(0.0));

  const auto w = connection_form(planar("1 + x*y"));
  REQUIRE(w.size() == 2);
  const std::vector<double> p = {0.2, -0.3};
  CHECK(eval(w[0][0], p) == doctest::Approx(-0.3 / (1 - 0.06)));

  const WebChart s = WebChart::parse({"t", "r", "theta", "phi"}, {1, 3}, "r^2*sin(theta)",
                                     Box({0, 3, 0.3, 0}, {1, 5, 2.8, 6}));
  const auto om = connection_form(s);
  REQUIRE(om.size() == 2);
  CHECK(om[0][0].is_constant(0.0));
  REQUIRE(om[1].size() == 3);
  const std::vector<double> q = {0.5, 4.0, 1.1, 2.0};
  CHECK(eval(om[1][0], q) == doctest::Approx(2.0 / 4.0));
  CHECK(eval(om[1][1], q) == doctest::Approx(std::cos(1.1) / std::sin(1.1)));
  CHECK(om[1][2].is_constant(0.0));
}

TEST_CASE("curvature form") {
  for (const auto& b : curvature_form(planar("(1+x)*exp(y)")))
    for (const auto& t : b) CHECK(simplify(t.coefficient).is_constant(0.0));

  const auto xi = curvature_form(planar("1 + x*y"));
  REQUIRE(xi[0].size() == 1);
  CHECK(xi[0][0].l == 1);  // dy ^ dx
  CHECK(xi[0][0].k == 0);
  const std::vector<double> p = {0.2, 0.3};
  CHECK(eval(xi[0][0].coefficient, p) == doctest::Approx(1 / (1.06 * 1.06)));
  CHECK(xi[1][0].l == 0);
  CHECK(eval(xi[1][0].coefficient, p) == doctest::Approx(1 / (1.06 * 1.06)));
}

TEST_CASE("Ricci cross-check") {
  const std::vector<double> p = {0.2, 0.3};
  const auto rc = ricci_offdiag(planar("1 + x*y"));
  CHECK(eval(rc(0, 1), p) == doctest::Approx(1 / (1.06 * 1.06)));
  CHECK(rc(0, 0).is_constant(0.0));
  // Off the diagonal the full tensor is symmetric.
  const auto full = ricci_tensor(planar("1 + x*y"));
  CHECK(eval(full[1][0], p) == doctest::Approx(eval(full[0][1], p)));

  const WebChart w3 = WebChart::parse({"x", "y", "z"}, {1, 1, 1}, "exp(x*y + y*z)", Box({-1, -1, -1}, {1, 1, 1}));
  const auto r3 = ricci_offdiag(w3);
  CHECK(r3(0, 1).is_constant(1.0));
  CHECK(r3(1, 2).is_constant(1.0));
  CHECK(r3(0, 2).is_constant(0.0));

  for (const char* h : {"1", "1 + x*y", "exp(x^2*y^2/4)", "(1+x)*(1+y)*exp(x^2*y^2/4)", "2 + sin(x*y)"}) {
    const WebChart w = planar(h);
    CHECK(is_identically_zero(ricci_offdiag(w)(0, 1) - nonuniformity_tensor(w)(0, 1), w.domain()).is_zero());
  }
  CHECK(is_identically_zero(ricci_offdiag(planar("3"))(0, 1), planar("3").domain()).kind ==
        ZeroKind::kSymbolicZero);
}

TEST_CASE("refinement to codimension 1") {
  const WebChart w = WebChart::parse({"x", "y", "z"}, {1, 2}, "exp(x*y + y*z) + x^2", Box({-1, -1, -1}, {1, 1, 1}));
  const WebChart r = refine_to_codim1(w);
  CHECK(r.block_sizes() == std::vector<int>{1, 1, 1});
  CHECK(refine_to_codim1(r).block_sizes() == r.block_sizes());
  const auto Kw = nonuniformity_tensor(w), Kr = nonuniformity_tensor(r);
  CHECK(structurally_equal(Kw(0, 1), Kr(0, 1)));
  CHECK(structurally_equal(Kw(0, 2), Kr(0, 2)));
  CHECK(Kw(1, 2).is_constant(0.0));
  CHECK(!Kr(1, 2).is_constant(0.0));
}

TEST_CASE("geodesics") {
  SUBCASE("straight lines for h = 1") {
    const WebChart w = planar("1", 5.0);
    const std::vector<double> p = {0.1, -0.2}, v = {0.7, 0.3};
    const auto path = integrate_geodesic(w, p, v, 2.0, 50);
    CHECK(!path.left_domain);
    CHECK(path.x.size() == 51);
    CHECK(path.x.back()[0] == doctest::Approx(0.1 + 1.4));
    CHECK(path.x.back()[1] == doctest::Approx(-0.2 + 0.6));
  }
  SUBCASE("Fermat spirals in the polar chart") {
    const WebChart w = WebChart::parse({"r", "phi"}, {1, 1}, "r", Box({0.1, -10}, {10, 10}));
    const std::vector<double> p = {1.0, 0.0}, v = {0.5, 1.0};
    const double a = v[1], b = -2 * p[0] * v[0];
    auto defect = [&](int steps) {
      const auto path = integrate_geodesic(w, p, v, 1.0, steps);
      REQUIRE(!path.left_domain);
      const double c0 = a * p[0] * p[0] + b * p[1];
      double worst = 0;
      for (const auto& x : path.x) worst = std::max(worst, std::fabs(a * x[0] * x[0] + b * x[1] - c0));
      return worst;
    };
    CHECK(defect(kDefaultGeodesicSteps) < 1e-6);
    const double coarse = defect(10), fine = defect(20);
    CHECK(coarse / fine >= 8.0);
  }
  SUBCASE("cylindrical chart of the sphere") {
    const WebChart w = WebChart::parse({"z", "phi"}, {1, 1}, "1", Box({-1, -10}, {1, 10}));
    const auto path = integrate_geodesic(w, std::vector<double>{0.0, 0.0}, std::vector<double>{0.3, 0.8}, 1.0, 40);
    for (const auto& x : path.x) CHECK(0.8 * x[0] - 0.3 * x[1] == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("leaving the domain") {
    const auto path = integrate_geodesic(planar("1"), std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 0.0},
                                         2.0, 100);
    CHECK(path.left_domain);
    CHECK(path.x.back()[0] <= 0.5);
    CHECK(path.x.size() < 101);
  }
  CHECK_THROWS_AS(integrate_geodesic(planar("1"), std::vector<double>{0, 0}, std::vector<double>{1, 0}, 1, 0),
                  PreconditionError);
  const WebChart blocky = WebChart::parse({"x", "y", "z"}, {1, 2}, "1", Box({0, 0, 0}, {1, 1, 1}));
  CHECK_THROWS_AS(integrate_geodesic(blocky, std::vector<double>{0.5, 0.5, 0.5},
                                     std::vector<double>{1, 0, 0}, 1, 10),
                  PreconditionError);
}

TEST_CASE("property: K pulls back as a covariant tensor under block maps") {
  // Blocks {x}, {y, z}. The map X -> (c X, Y / c, Z + s sin(Y)) has block
  // Jacobian determinants c and 1/c, whose product is 1, so the pulled-back
  // density is h o phi.
  const std::vector<std::string> vars = {"x", "y", "z"};
  const Box box({-0.6, -0.6, -0.6}, {0.6, 0.6, 0.6});
  const Expr h = parse_expr("exp(x*y + y*z^2/2 + x*z/3) + 0.5*(1 + x^2)", vars);
  const WebChart w(vars, {1, 2}, h, box);
  const SymTensorField K = nonuniformity_tensor(w);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cdist(0.6, 1.4), sdist(-0.3, 0.3), u(-0.4, 0.4);
  int checked = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const double c = cdist(rng), s = sdist(rng);
    const Expr X = Expr::variable("x", 0), Y = Expr::variable("y", 1), Z = Expr::variable("z", 2);
    const std::vector<std::optional<Expr>> sub = {Expr::constant(c) * X, Y / Expr::constant(c),
                                                  Z + Expr::constant(s) * Expr::unary(Op::kSin, Y)};
    const WebChart pulled(vars, {1, 2}, substitute(h, sub), box);
    const SymTensorField KP = nonuniformity_tensor(pulled);
    for (int n = 0; n < 10; ++n) {
      const std::vector<double> P = {u(rng), u(rng), u(rng)};
      const std::vector<double> x = {c * P[0], P[1] / c, P[2] + s * std::sin(P[1])};
      // Block Jacobian: dx/dX = c; d(y,z)/d(Y,Z) = [[1/c, 0], [s cos Y, 1]].
      const double dx = c;
      const double dyY = 1 / c, dzY = s * std::cos(P[1]), dzZ = 1.0;
      const double kxy = eval(K(0, 1), x), kxz = eval(K(0, 2), x);
      CHECK(eval(KP(0, 1), P) == doctest::Approx(dx * (dyY * kxy + dzY * kxz)).epsilon(1e-7));
      CHECK(eval(KP(0, 2), P) == doctest::Approx(dx * dzZ * kxz).epsilon(1e-7));
      ++checked;
    }
  }
  CHECK(checked == 50);
}
