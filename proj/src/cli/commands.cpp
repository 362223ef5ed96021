#include <cmath>
#include <numbers>
#include <ostream>

#include "CLI11.hpp"
#include "divweb/cli.hpp"
#include "divweb/measure.hpp"
#include "divweb/relativity.hpp"

namespace divweb::cli {

namespace {

struct Options {
  std::string spec, out, csv, svg, tensor, boundary, name;
  std::optional<double> tol;
  std::vector<std::vector<double>> at;
  int grid = 0;
  int table = 5;
  int samples = 9;
  std::vector<double> anchor, point, fit_scales, lo, hi;
  std::vector<int> axes, split;
  std::string rule = "first";
  std::string what = "leaves";
  int count = 0;
  int loops = 1;
  double t_end = 1.0;
  int steps = kDefaultGeodesicSteps;
  bool polar = false;
  std::vector<std::string> params;
};

std::optional<double> tol_flag(const Options& o) { return o.tol; }

QuadratureSpec quad_spec(const Tolerances& t) { return QuadratureSpec{t.quadrature, 40, 7}; }

ReflectionSpec reflection_spec(const Tolerances& t) {
  ReflectionSpec r;
  r.quad.abs_tol = 0.1 * t.quadrature;
  r.rel_tol = t.reflection;
  return r;
}

json header(const std::string& command) { return json{{"schema_version", kSchemaVersion}, {"command", command}}; }

void emit(const json& report, const std::string& path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty())
    out << text;
  else
    write_atomic(path, text);
}

std::string entry_label(const WebChart& w, int k, int l) {
  return "K(" + w.variables()[static_cast<std::size_t>(k)] + "," + w.variables()[static_cast<std::size_t>(l)] + ")";
}

json tolerances_json(const Tolerances& t) {
  return {{"zero", t.zero}, {"quadrature", t.quadrature}, {"reflection", t.reflection}, {"split", t.split}};
}

json blocks_json(const WebChart& w) {
  json b = json::array();
  for (int i = 0; i < w.block_count(); ++i) {
    json names = json::array();
    for (int k = w.block_begin(i); k < w.block_end(i); ++k) names.push_back(w.variables()[static_cast<std::size_t>(k)]);
    b.push_back(names);
  }
  return b;
}

json web_json(const LoadedWeb& L) {
  return {{"variables", L.input_variables},
          {"chart_variables", L.web.variables()},
          {"blocks", blocks_json(L.web)},
          {"density", to_string(L.web.density())}};
}

json entry_json(const LoadedWeb& L, const EntryVerdict& e, const Expr& value) {
  json j{{"entry", entry_label(L.web, e.k, e.l)},
         {"expr", to_string(value)},
         {"verdict", std::string(to_string(e.verdict.kind))},
         {"max_abs", e.verdict.max_abs}};
  j["witness"] = e.verdict.witness.empty() ? json(nullptr) : json(L.to_input(e.verdict.witness));
  return j;
}

std::vector<double> default_anchor(const LoadedWeb& L, const std::vector<double>& given) {
  if (!given.empty()) {
    auto p = L.to_chart(given);
    if (!L.web.domain().contains(p)) throw SpecError("anchor " + format_point(given) + " is outside the domain");
    return p;
  }
  std::vector<double> zero(static_cast<std::size_t>(L.web.dim()), 0.0);
  return L.web.domain().contains(zero) ? zero : L.web.domain().center();
}

std::pair<int, int> axis_pair(const LoadedWeb& L, const std::vector<int>& axes) {
  if (axes.size() != 2) throw SpecError("--axes needs two 1-based indices");
  const int i = L.chart_axis(axes[0]), j = L.chart_axis(axes[1]);
  if (L.web.same_block(i, j)) throw SpecError("--axes must name variables of different blocks");
  return {i, j};
}

std::vector<std::vector<double>> regular_grid(const Box& box, int n) {
  if (n < 2) throw SpecError("--grid needs at least 2 points per axis");
  double total = std::pow(static_cast<double>(n), static_cast<double>(box.dim()));
  if (total > 1e6) throw SpecError("grid has more than 10^6 points");
  std::vector<std::vector<double>> pts;
  std::vector<int> idx(box.dim(), 0);
  while (true) {
    std::vector<double> p(box.dim());
    for (std::size_t k = 0; k < box.dim(); ++k) p[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * idx[k] / (n - 1);
    pts.push_back(p);
    std::size_t k = box.dim();
    while (k > 0 && ++idx[k - 1] == n) idx[--k] = 0;
    if (k == 0) break;
  }
  return pts;
}

// ---------------------------------------------------------------------------

int cmd_curvature(const Options& o, std::ostream& out) {
  const LoadedWeb L = load_web_spec(read_json_file(o.spec), tol_flag(o));
  const WebChart& w = L.web;
  const SymTensorField K = nonuniformity_tensor(w);
  json report = header("curvature");
  report["input"] = L.source;
  report["web"] = web_json(L);
  report["tolerance"] = tolerances_json(L.tol);
  report["zero_samples"] = kDefaultZeroSamples;

  std::vector<std::pair<int, int>> pairs;
  json entries = json::array();
  for (int k = 0; k < w.dim(); ++k)
    for (int l = k + 1; l < w.dim(); ++l) {
      if (w.same_block(k, l)) continue;
      pairs.emplace_back(k, l);
      entries.push_back(entry_json(L, {k, l, is_identically_zero(K(k, l), w.domain(), kDefaultZeroSamples, L.tol.zero)}, K(k, l)));
    }
  report["entries"] = entries;

  json form = json::array();
  const auto xi = curvature_form(w);
  for (int i = 0; i < w.block_count(); ++i) {
    json terms = json::array();
    for (const auto& t : xi[static_cast<std::size_t>(i)])
      terms.push_back({{"wedge", {w.variables()[static_cast<std::size_t>(t.l)], w.variables()[static_cast<std::size_t>(t.k)]}},
                       {"coefficient", to_string(t.coefficient)}});
    form.push_back({{"block", i + 1}, {"terms", terms}});
  }
  report["curvature_form"] = form;

  json samples = json::array();
  for (const auto& p : o.at) {
    const auto x = L.to_chart(p);
    json values = json::object();
    for (auto [k, l] : pairs) values[entry_label(w, k, l)] = eval(K(k, l), x);
    samples.push_back({{"point", p}, {"values", values}});
  }
  report["samples"] = samples;

  if (o.grid > 0) {
    std::vector<std::string> head = L.input_variables;
    for (auto [k, l] : pairs) head.push_back(entry_label(w, k, l));
    std::vector<std::vector<double>> rows;
    for (const auto& x : regular_grid(w.domain(), o.grid)) {
      std::vector<double> row = L.to_input(x);
      for (auto [k, l] : pairs) row.push_back(eval(K(k, l), x));
      rows.push_back(std::move(row));
    }
    if (!o.csv.empty()) {
      write_atomic(o.csv, csv_table(head, rows));
      report["grid"] = {{"n", o.grid}, {"rows", rows.size()}, {"csv", o.csv}};
    } else {
      report["grid"] = {{"n", o.grid}, {"rows", rows.size()}, {"columns", head}, {"values", rows}};
    }
  }
  emit(report, o.out, out);
  return kOk;
}

int cmd_trivial(const Options& o, std::ostream& out) {
  const LoadedWeb L = load_web_spec(read_json_file(o.spec), tol_flag(o));
  const WebChart& w = L.web;
  const SymTensorField K = nonuniformity_tensor(w);
  const TrivialityVerdict v = is_locally_trivial(w, L.tol.zero);
  json report = header("trivial");
  report["input"] = L.source;
  report["web"] = web_json(L);
  report["tolerance"] = tolerances_json(L.tol);
  report["verdict"] = v.trivial ? "trivial" : "nontrivial";
  json entries = json::array();
  for (const auto& e : v.entries) entries.push_back(entry_json(L, e, K(e.k, e.l)));
  report["entries"] = entries;
  report["max_abs"] = v.max_abs;
  if (!v.trivial) {
    report["witness"] = {{"entry", entry_label(w, v.k, v.l)}, {"point", L.to_input(v.witness)}, {"value", eval(K(v.k, v.l), v.witness)}};
  } else {
    const TrivializingMap T(w, quad_spec(L.tol), std::nullopt, L.tol.zero);
    json table = json::array();
    auto pts = halton_points(w.domain(), std::max(0, o.table));
    for (const auto& x : pts) {
      const double J = T.jacobian_determinant(x);
      const double h = w.h(x);
      table.push_back({{"x", L.to_input(x)}, {"y", L.to_input(T(x))}, {"jacobian", J}, {"density", h},
                       {"relative_difference", std::fabs(J - h) / std::fabs(h)}});
    }
    report["trivializing_map"] = {{"anchor", L.to_input(T.anchor())},
                                  {"jacobian_step", 1e-5},
                                  {"quadrature_tolerance", L.tol.quadrature},
                                  {"samples", table}};
  }
  emit(report, o.out, out);
  return v.trivial ? kOk : kNegative;
}

// Closed-form loop for h = 1 + xy anchored at 0, axes (1, 2).
std::optional<std::vector<double>> closed_form_loop(double x, double y) {
  if (x == 0 || y == 0) return std::nullopt;
  const double d = 4 * (1 - x * y) - x * x * y * y;
  if (!(d >= 0)) return std::nullopt;
  const double r = std::sqrt(d) - 2;
  if (r == 0) return std::nullopt;
  return std::vector<double>{r * r / (x * y * y), x * x * y * y * y / (r * r)};
}

bool is_unit_plus_xy(const WebChart& w) {
  if (w.dim() != 2) return false;
  const Expr ref = build::add(Expr::constant(1.0), build::mul(Expr::variable(w.variables()[0], 0), Expr::variable(w.variables()[1], 1)));
  return is_identically_zero(build::sub(w.density(), ref), w.domain(), 256, 1e-14).is_zero();
}

int cmd_holonomy(const Options& o, std::ostream& out) {
  const LoadedWeb L = load_web_spec(read_json_file(o.spec), tol_flag(o));
  const WebChart w = L.web.is_codim1() ? L.web : refine_to_codim1(L.web);
  const auto [i, j] = axis_pair(L, o.axes.empty() ? std::vector<int>{1, 2} : o.axes);
  const auto p = default_anchor(L, o.anchor);
  const ReflectionSpec rs = reflection_spec(L.tol);
  if (o.point.empty() && o.fit_scales.empty()) throw SpecError("holonomy needs --point or --fit-scales");

  json report = header("holonomy");
  report["input"] = L.source;
  report["web"] = web_json(L);
  report["refined_to_codim1"] = !L.web.is_codim1();
  report["tolerance"] = tolerances_json(L.tol);
  report["anchor"] = L.to_input(p);
  report["axes"] = {w.variables()[static_cast<std::size_t>(i)], w.variables()[static_cast<std::size_t>(j)]};

  if (!o.point.empty()) {
    const auto q = L.to_chart(o.point);
    if (!w.domain().contains(q)) throw SpecError("point " + format_point(o.point) + " is outside the domain");
    std::vector<double> cur = q;
    json stages = json::array();
    for (int s = 0; s < 4; ++s) {
      const int axis = s % 2 == 0 ? i : j;
      const ReflectionResult r = reflect(w, p, axis, cur, rs);
      cur = r.image;
      stages.push_back({{"axis", w.variables()[static_cast<std::size_t>(axis)]},
                        {"image", L.to_input(cur)},
                        {"iterations", r.iterations},
                        {"residual", r.residual},
                        {"tolerance", r.tolerance}});
    }
    std::vector<double> defect(q.size());
    double norm = 0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      defect[k] = cur[k] - q[k];
      norm = std::max(norm, std::fabs(defect[k]));
    }
    report["point"] = o.point;
    report["stages"] = stages;
    report["loop"] = L.to_input(cur);
    report["defect"] = L.to_input(defect);
    report["defect_max_abs"] = norm;

    bool origin = true;
    for (double c : p) origin = origin && c == 0.0;
    if (origin && is_unit_plus_xy(w)) {
      auto cf = i == 0 ? closed_form_loop(q[0], q[1]) : closed_form_loop(q[1], q[0]);
      if (cf && i != 0) std::swap((*cf)[0], (*cf)[1]);
      if (cf) {
        const double diff = std::max(std::fabs((*cf)[0] - cur[0]), std::fabs((*cf)[1] - cur[1]));
        report["cross_check"] = {{"formula", "closed-form loop of h = 1 + x y at 0"},
                                 {"loop", L.to_input(*cf)},
                                 {"max_abs_difference", diff}};
      }
    }
  }
  if (!o.fit_scales.empty()) {
    const CurvatureFit f = fit_loop_curvature(w, p, i, j, o.fit_scales, rs);
    const double rel = std::fabs(f.kappa_hat - f.kappa) / std::max(std::fabs(f.kappa), 1e-300);
    report["fit"] = {{"scales", f.scales},     {"ratios", f.ratios},       {"kappa_hat", f.kappa_hat},
                     {"slope", f.slope},       {"residual", f.residual},   {"noise", f.noise},
                     {"ill_conditioned", f.ill_conditioned}, {"kappa", f.kappa},
                     {"relative_error", f.kappa == 0 ? json(nullptr) : json(rel)}};
  }
  emit(report, o.out, out);
  return kOk;
}

int cmd_reconstruct(const Options& o, std::ostream& out) {
  const json tdoc = read_json_file(o.tensor);
  const LoadedTensor T = load_tensor_spec(tdoc);
  const json bdoc = read_json_file(o.boundary);
  const BoundaryData B = load_boundary_spec(bdoc, T);
  const Tolerances tol = resolve_tolerances(tdoc, tol_flag(o));
  if (o.rule != "first" && o.rule != "last") throw SpecError("--rule must be 'first' or 'last'");

  json report = header("reconstruct");
  report["input"] = {{"tensor", tdoc}, {"boundary", bdoc}};
  report["tolerance"] = tolerances_json(tol);
  const AdmissibilityVerdict av = check_tensor_admissible(T.full, T.frame, T.domain, tol.zero);
  json adm{{"admissible", av.admissible}};
  if (!av.admissible) {
    std::vector<std::string> names;
    for (int k : av.indices) names.push_back(T.frame.variables[static_cast<std::size_t>(k)]);
    adm["condition"] = av.condition;
    adm["indices"] = names;
    adm["point"] = av.point;
    adm["magnitude"] = av.magnitude;
    adm["message"] = av.message;
  }
  report["admissibility"] = adm;
  if (!av.admissible) {
    emit(report, o.out, out);
    return kNegative;
  }
  const int m = T.frame.dim();
  SymTensorField A(m);
  for (int k = 0; k < m; ++k)
    for (int l = k + 1; l < m; ++l) A.set(k, l, T.full[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
  const int n = o.grid > 0 ? o.grid : 17;
  const auto axes = uniform_axes(T.domain, n);
  const DensityGrid g = reconstruct_density(A, B, T.frame, axes, quad_spec(tol), o.rule == "first" ? PairRule::kFirst : PairRule::kLast);

  std::vector<std::string> head(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k)
    head[static_cast<std::size_t>(T.layout.order[static_cast<std::size_t>(k)])] = T.frame.variables[static_cast<std::size_t>(k)];
  head.push_back("h");
  std::vector<std::vector<double>> rows;
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto x = g.point(f);
    std::vector<double> row(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) row[static_cast<std::size_t>(T.layout.order[static_cast<std::size_t>(k)])] = x[static_cast<std::size_t>(k)];
    row.push_back(g.values[f]);
    rows.push_back(std::move(row));
    lo = std::min(lo, g.values[f]);
    hi = std::max(hi, g.values[f]);
  }
  json grid{{"n", n}, {"points", g.size()}, {"rule", o.rule}, {"min", lo}, {"max", hi},
            {"quadrature_tolerance", tol.quadrature}};
  if (!o.csv.empty()) {
    write_atomic(o.csv, csv_table(head, rows));
    grid["csv"] = o.csv;
  } else {
    grid["columns"] = head;
    grid["values"] = rows;
  }
  report["grid"] = grid;
  emit(report, o.out, out);
  return kOk;
}

int cmd_normalize(const Options& o, std::ostream& out) {
  const LoadedWeb L = load_web_spec(read_json_file(o.spec), tol_flag(o));
  const WebChart& w = L.web;
  const NormalizedChart n(w, quad_spec(L.tol));
  const std::vector<double> zero(static_cast<std::size_t>(w.dim()), 0.0);
  constexpr double kCrossTol = 1e-9;
  double worst = 0;
  std::vector<double> worst_at;
  const int per_axis = std::max(2, o.samples);
  for (int i = 0; i < w.block_count(); ++i) {
    // Source points on the axis leaf of block i.
    Box leaf = w.domain();
    for (int k = 0; k < w.dim(); ++k)
      if (w.block_of(k) != i) leaf.lo[static_cast<std::size_t>(k)] = leaf.hi[static_cast<std::size_t>(k)] = 0.0;
    std::vector<std::vector<double>> pts;
    for (int t = 0; t < per_axis; ++t) {
      std::vector<double> x = zero;
      for (int k = w.block_begin(i); k < w.block_end(i); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const double s = (t + 0.5) / per_axis;
        const double frac = k == w.block_begin(i) ? s : std::fmod(s * (1 + std::numbers::sqrt2 * (k - w.block_begin(i))), 1.0);
        x[uk] = 0.98 * (leaf.lo[uk] + (leaf.hi[uk] - leaf.lo[uk]) * frac);
      }
      pts.push_back(x);
    }
    for (const auto& x : pts) {
      const double d = std::fabs(n.density(n.forward(x)) - 1.0);
      if (d > worst || worst_at.empty()) {
        worst = d;
        worst_at = L.to_input(x);
      }
    }
  }
  json report = header("normalize");
  report["input"] = L.source;
  report["web"] = web_json(L);
  report["tolerance"] = tolerances_json(L.tol);
  report["h0"] = w.h(zero);
  report["cross"] = {{"max_abs_deviation", worst}, {"worst_source_point", worst_at}, {"tolerance", kCrossTol},
                     {"ok", worst <= kCrossTol}};
  json points = json::array();
  for (const auto& p : o.at) {
    const auto x = L.to_chart(p);
    points.push_back({{"x", p}, {"y", L.to_input(n.forward(x))}, {"jacobian", n.jacobian(x)}, {"density", n.density_at_source(x)}});
  }
  report["points"] = points;
  emit(report, o.out, out);
  return worst <= kCrossTol ? kOk : kNumericError;
}

int cmd_invariants(const Options& o, std::ostream& out) {
  const LoadedWeb L = load_web_spec(read_json_file(o.spec), tol_flag(o));
  const WebChart& w = L.web;
  if (w.dim() != 2 || w.block_count() != 2) throw SpecError("invariants needs a planar web with two 1-D blocks");
  if (o.at.size() > 1) throw SpecError("invariants takes one --at point");
  const auto p = o.at.empty() ? std::vector<double>{0.0, 0.0} : L.to_chart(o.at.front());
  const PlanarInvariants inv = planar_invariants(w, p);
  json report = header("invariants");
  report["input"] = L.source;
  report["web"] = web_json(L);
  report["tolerance"] = tolerances_json(L.tol);
  report["point"] = L.to_input(p);
  report["invariants"] = {{"kappa0", inv.kappa0}, {"a", inv.a}, {"factor_x", inv.factor_x}, {"factor_y", inv.factor_y},
                          {"generic", inv.generic}, {"genericity_threshold", kGenericityThreshold}};
  try {
    const CanonicalFormReport c = canonical_form_report(w);
    report["canonical_form"] = {{"available", true},
                                {"quarter_turns", c.quarter_turns},
                                {"scale", c.scale},
                                {"kappa0", c.kappa0_canonical},
                                {"a", c.invariants.a},
                                {"jet", c.jet},
                                {"jet_matches", c.jet_matches},
                                {"jet_tolerance", 1e-8},
                                {"remainder_radii", c.remainder_radii},
                                {"remainder", c.remainder},
                                {"remainder_consistent", c.remainder_consistent}};
  } catch (const PreconditionError& e) {
    report["canonical_form"] = {{"available", false}, {"reason", e.what()}};
  }
  emit(report, o.out, out);
  return kOk;
}

int cmd_volumes(const Options& o, std::ostream& out) {
  const LoadedWeb L = load_web_spec(read_json_file(o.spec), tol_flag(o));
  const WebChart& w = L.web;
  const QuadratureSpec qs = quad_spec(L.tol);
  Region R = Region::from_box(w.domain());
  if (!o.lo.empty() || !o.hi.empty()) {
    if (o.lo.empty() || o.hi.empty()) throw SpecError("--lo and --hi go together");
    R = Region(L.to_chart(o.lo), L.to_chart(o.hi));
  }
  json report = header("volumes");
  report["input"] = L.source;
  report["web"] = web_json(L);
  report["tolerance"] = tolerances_json(L.tol);
  const QuadResult v = region_volume(w, R, qs);
  report["region"] = {{"a", L.to_input(R.a)}, {"b", L.to_input(R.b)}, {"volume", v.value}, {"error", v.error}};
  bool negative = false;
  if (!o.at.empty() || !o.axes.empty()) {
    if (o.at.size() != 1) throw SpecError("product check needs one --at point");
    const auto [i, j] = axis_pair(L, o.axes);
    const ProductReport pr = check_product_condition(w, R, L.to_chart(o.at.front()), i, j, qs);
    report["product"] = {{"a", pr.volumes.a},          {"b", pr.volumes.b},         {"c", pr.volumes.c},
                         {"d", pr.volumes.d},          {"error", pr.volumes.error}, {"bd_minus_ac", pr.bd_minus_ac},
                         {"kappa", pr.kappa},          {"diameter", pr.diameter},   {"tolerance", pr.tolerance},
                         {"consistent", pr.consistent}};
    negative = negative || !pr.consistent;
  }
  if (!o.split.empty()) {
    std::vector<int> axes;
    for (int a : o.split) axes.push_back(L.chart_axis(a));
    const SplitResult s = equal_split(w, R, axes, qs, L.tol.split);
    std::vector<std::string> names;
    for (int a : axes) names.push_back(w.variables()[static_cast<std::size_t>(a)]);
    report["split"] = {{"axes", names},         {"cuts", s.cuts},          {"cell_volumes", s.cell_volumes},
                       {"spread", s.spread},    {"tolerance", s.tolerance}, {"equal", s.equal}};
    negative = negative || !s.equal;
  }
  emit(report, o.out, out);
  return negative ? kNegative : kOk;
}

int cmd_plot(const Options& o, std::ostream& out) {
  const LoadedWeb L = load_web_spec(read_json_file(o.spec), tol_flag(o));
  const WebChart& w = L.web;
  if (w.dim() != 2) throw SpecError("plot needs a 2-D web");
  if (o.svg.empty()) throw SpecError("plot needs --svg FILE");
  auto map = [&](const std::vector<double>& x) -> std::array<double, 2> {
    const auto in = L.to_input(x);
    if (o.polar) return {in[0] * std::cos(in[1]), in[0] * std::sin(in[1])};
    return {in[0], in[1]};
  };
  const Box& D = w.domain();
  std::vector<Polyline> lines;
  json report = header("plot");
  report["input"] = L.source;
  report["tolerance"] = tolerances_json(L.tol);
  report["what"] = o.what;

  if (o.what == "leaves") {
    const int n = o.count > 0 ? o.count : 9;
    const char* colors[2] = {"#1f4e79", "#b03a2e"};
    for (int k = 0; k < 2; ++k) {
      const int other = 1 - k;
      for (int t = 0; t < n; ++t) {
        const double c = D.lo[static_cast<std::size_t>(k)] + (D.hi[static_cast<std::size_t>(k)] - D.lo[static_cast<std::size_t>(k)]) * t / std::max(1, n - 1);
        Polyline pl;
        pl.color = colors[k];
        for (int s = 0; s <= 64; ++s) {
          std::vector<double> x(2);
          x[static_cast<std::size_t>(k)] = c;
          x[static_cast<std::size_t>(other)] = D.lo[static_cast<std::size_t>(other)] + (D.hi[static_cast<std::size_t>(other)] - D.lo[static_cast<std::size_t>(other)]) * s / 64.0;
          pl.points.push_back(map(x));
        }
        lines.push_back(std::move(pl));
      }
    }
  } else if (o.what == "geodesics") {
    const int n = o.count > 0 ? o.count : 8;
    const auto p = default_anchor(L, o.anchor);
    json ends = json::array();
    for (int t = 0; t < n; ++t) {
      const double th = 2 * std::numbers::pi * t / n;
      const std::vector<double> v{std::cos(th), std::sin(th)};
      const GeodesicPath g = integrate_geodesic(w, p, v, o.t_end, o.steps);
      Polyline pl;
      for (const auto& x : g.x) pl.points.push_back(map(x));
      lines.push_back(std::move(pl));
      ends.push_back({{"direction", L.to_input(v)}, {"end", L.to_input(g.x.back())}, {"left_domain", g.left_domain},
                      {"points", g.x.size()}});
    }
    report["anchor"] = L.to_input(p);
    report["geodesics"] = ends;
  } else if (o.what == "orbit") {
    if (o.point.empty()) throw SpecError("orbit needs --point");
    const WebChart& cw = w;
    const auto [i, j] = axis_pair(L, o.axes.empty() ? std::vector<int>{1, 2} : o.axes);
    const auto p = default_anchor(L, o.anchor);
    std::vector<double> cur = L.to_chart(o.point);
    Polyline pl;
    pl.points.push_back(map(cur));
    json pts = json::array({L.to_input(cur)});
    for (int s = 0; s < 4 * std::max(1, o.loops); ++s) {
      cur = reflect(cw, p, s % 2 == 0 ? i : j, cur, reflection_spec(L.tol)).image;
      pl.points.push_back(map(cur));
      pts.push_back(L.to_input(cur));
    }
    lines.push_back(std::move(pl));
    report["anchor"] = L.to_input(p);
    report["orbit"] = pts;
  } else {
    throw SpecError("--what must be leaves, geodesics or orbit");
  }
  write_atomic(o.svg, svg_polylines(lines, "divweb " + o.what));
  report["svg"] = o.svg;
  report["polylines"] = lines.size();
  emit(report, o.out, out);
  return kOk;
}

int cmd_spacetime(const Options& o, std::ostream& out) {
  std::map<std::string, double> params;
  for (const auto& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw SpecError("--param expects key=value, got '" + kv + "'");
    try {
      std::size_t used = 0;
      const double v = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
      params[kv.substr(0, eq)] = v;
    } catch (const std::logic_error&) {
      throw SpecError("--param value is not a number: '" + kv + "'");
    }
  }
  const SplitMetric gm = builtin_spacetime(o.name, params);
  Box box = builtin_domain(o.name, params);
  if (!o.lo.empty() || !o.hi.empty()) {
    if (o.lo.size() != 4 || o.hi.size() != 4) throw SpecError("--lo and --hi need 4 numbers each");
    box = Box(o.lo, o.hi);
  }
  const SlicingReport r = slicing_report(gm, box);
  json report = header("spacetime");
  report["input"] = {{"name", o.name}, {"params", params}, {"domain", {{"min", box.lo}, {"max", box.hi}}}};
  report["coordinates"] = gm.coordinates;
  report["lapse"] = to_string(gm.lapse);
  json gamma = json::array();
  for (const auto& row : gm.gamma) {
    json jr = json::array();
    for (const auto& e : row) jr.push_back(to_string(e));
    gamma.push_back(jr);
  }
  report["spatial_metric"] = gamma;
  report["density"] = to_string(r.density);
  json entries = json::array();
  for (const auto& e : r.triviality.entries)
    entries.push_back({{"entry", "K(" + gm.coordinates[static_cast<std::size_t>(e.k)] + "," + gm.coordinates[static_cast<std::size_t>(e.l)] + ")"},
                       {"expr", to_string(r.kappa[static_cast<std::size_t>(e.l - 1)])},
                       {"verdict", std::string(to_string(e.verdict.kind))},
                       {"max_abs", e.verdict.max_abs}});
  report["entries"] = entries;
  report["verdict"] = r.triviality.trivial ? "trivial" : "nontrivial";
  report["geodesic_slicing"] = r.geodesic_slicing;
  report["conservation_simplifies"] = r.conservation_simplifies;
  report["tolerance"] = kDefaultZeroTolerance;
  json samples = json::array();
  for (const auto& p : o.at) {
    if (p.size() != 4) throw SpecError("--at needs 4 coordinates");
    json values = json::object();
    values["density"] = eval(r.density, p);
    for (int k = 0; k < 3; ++k)
      values["K(" + gm.coordinates[0] + "," + gm.coordinates[static_cast<std::size_t>(k + 1)] + ")"] = eval(r.kappa[static_cast<std::size_t>(k)], p);
    samples.push_back({{"point", p}, {"values", values}});
  }
  report["samples"] = samples;
  emit(report, o.out, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Divergence-free web analysis"};
  app.name("divweb");
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c, bool spec = true) {
    if (spec) c->add_option("spec", o.spec, "web spec JSON file")->required();
    c->add_option("--out", o.out, "write the JSON report here instead of stdout");
    c->add_option("--tol", o.tol, "zero tolerance (overrides DIVWEB_TOL and the spec file)");
  };
  auto* curvature = app.add_subcommand("curvature", "nonuniformity tensor and curvature form");
  common(curvature);
  curvature->add_option("--at", o.at, "sample point (input variable order); repeatable")->allow_extra_args(false);
  curvature->add_option("--grid", o.grid, "sample every entry on an n^m grid");
  curvature->add_option("--csv", o.csv, "write the grid samples as CSV");

  auto* trivial = app.add_subcommand("trivial", "triviality verdict; exit 1 when nontrivial");
  common(trivial);
  trivial->add_option("--table", o.table, "trivializing-map samples to report");

  auto* holonomy = app.add_subcommand("holonomy", "volume-preserving reflections and loops");
  common(holonomy);
  holonomy->add_option("--anchor", o.anchor, "anchor point p");
  holonomy->add_option("--axes", o.axes, "two 1-based variable indices")->expected(2);
  holonomy->add_option("--point", o.point, "loop the point q");
  holonomy->add_option("--fit-scales", o.fit_scales, "fit curvature from loops at these scales");

  auto* reconstruct = app.add_subcommand("reconstruct", "density from a tensor and axis boundary data");
  reconstruct->add_option("tensor", o.tensor, "tensor JSON file")->required();
  reconstruct->add_option("boundary", o.boundary, "boundary JSON file")->required();
  common(reconstruct, false);
  reconstruct->add_option("--grid", o.grid, "points per axis (default 17)");
  reconstruct->add_option("--csv", o.csv, "write the grid as CSV");
  reconstruct->add_option("--rule", o.rule, "pair choice: first or last");

  auto* normalize = app.add_subcommand("normalize", "chart with density 1 on the axis cross");
  common(normalize);
  normalize->add_option("--at", o.at, "source point to map; repeatable")->allow_extra_args(false);
  normalize->add_option("--samples", o.samples, "cross samples per block");

  auto* invariants = app.add_subcommand("invariants", "planar invariants and canonical form");
  common(invariants);
  invariants->add_option("--at", o.at, "point (default 0)")->allow_extra_args(false);

  auto* volumes = app.add_subcommand("volumes", "region volumes, product condition, equal split");
  common(volumes);
  volumes->add_option("--lo", o.lo, "region corner a");
  volumes->add_option("--hi", o.hi, "region corner b");
  volumes->add_option("--at", o.at, "cut point for the product condition")->allow_extra_args(false);
  volumes->add_option("--axes", o.axes, "two 1-based variable indices")->expected(2);
  volumes->add_option("--split", o.split, "axes to cut at half volume");

  auto* plot = app.add_subcommand("plot", "SVG of leaves, geodesics or a holonomy orbit");
  common(plot);
  plot->add_option("--what", o.what, "leaves, geodesics or orbit");
  plot->add_option("--svg", o.svg, "output SVG file")->required();
  plot->add_option("--count", o.count, "number of leaves per family or geodesics");
  plot->add_option("--anchor", o.anchor, "anchor point");
  plot->add_option("--axes", o.axes, "two 1-based variable indices")->expected(2);
  plot->add_option("--point", o.point, "orbit start");
  plot->add_option("--loops", o.loops, "loops in the orbit");
  plot->add_option("--t-end", o.t_end, "geodesic parameter range");
  plot->add_option("--steps", o.steps, "RK4 steps per geodesic");
  plot->add_flag("--polar", o.polar, "draw (x1, x2) as polar coordinates (r, phi)");

  auto* spacetime = app.add_subcommand("spacetime", "slicing report for a builtin spacetime");
  spacetime->add_option("name", o.name, "minkowski, schwarzschild_radial or lemaitre")->required();
  spacetime->add_option("--param", o.params, "parameter key=value, e.g. m=1");
  spacetime->add_option("--lo", o.lo, "domain min (4 numbers)");
  spacetime->add_option("--hi", o.hi, "domain max (4 numbers)");
  spacetime->add_option("--at", o.at, "sample point; repeatable")->allow_extra_args(false);
  spacetime->add_option("--out", o.out, "write the JSON report here instead of stdout");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "divweb: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (curvature->parsed()) return cmd_curvature(o, out);
    if (trivial->parsed()) return cmd_trivial(o, out);
    if (holonomy->parsed()) return cmd_holonomy(o, out);
    if (reconstruct->parsed()) return cmd_reconstruct(o, out);
    if (normalize->parsed()) return cmd_normalize(o, out);
    if (invariants->parsed()) return cmd_invariants(o, out);
    if (volumes->parsed()) return cmd_volumes(o, out);
    if (plot->parsed()) return cmd_plot(o, out);
    if (spacetime->parsed()) return cmd_spacetime(o, out);
  } catch (const SpecError& e) {
    err << "divweb: input error: " << e.what() << "\n";
    return kInputError;
  } catch (const divweb::ParseError& e) {
    err << "divweb: parse error: " << e.what() << "\n";
    return kInputError;
  } catch (const PreconditionError& e) {
    err << "divweb: input error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    err << "divweb: input error: " << e.what() << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    err << "divweb: " << e.what() << "\n";
    return kNumericError;
  } catch (const NumericError& e) {
    err << "divweb: numeric error: " << e.what() << "\n";
    return kNumericError;
  }
  return kInputError;
}

}  // namespace divweb::cli
