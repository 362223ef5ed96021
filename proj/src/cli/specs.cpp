#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "divweb/cli.hpp"
#include "divweb/relativity.hpp"

namespace divweb::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw SpecError(where + ": " + what); }

const json& field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing field '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

double positive(const json& v, const std::string& where) {
  const double d = number(v, where);
  if (!(d > 0)) fail(where, "expected a positive number");
  return d;
}

std::vector<double> numbers(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array() || v.size() != n) fail(where, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(number(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

void check_version(const json& doc) {
  const json& v = field(doc, "schema_version", "document");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    fail("schema_version", "unsupported version " + v.dump() + " (expected " + std::to_string(kSchemaVersion) + ")");
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) fail(where, "unknown field '" + key + "'");
}

std::vector<std::string> variable_list(const json& doc, std::size_t m) {
  const json& v = field(doc, "variables", "document");
  if (!v.is_array() || v.size() != m) fail("variables", "expected " + std::to_string(m) + " names");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t k = 0; k < m; ++k) {
    const std::string name = text(v[k], "variables[" + std::to_string(k) + "]");
    if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
      fail("variables", "'" + name + "' is not an identifier");
    for (char c : name)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) fail("variables", "'" + name + "' is not an identifier");
    if (!seen.insert(name).second) fail("variables", "'" + name + "' appears twice");
    out.push_back(name);
  }
  return out;
}

std::vector<std::vector<int>> block_lists(const json& v) {
  if (!v.is_array() || v.empty()) fail("blocks", "expected a nonempty array of index lists");
  std::vector<std::vector<int>> out;
  for (const auto& b : v) {
    if (!b.is_array()) fail("blocks", "expected arrays of 1-based indices");
    out.emplace_back();
    for (const auto& i : b) {
      if (!i.is_number_integer()) fail("blocks", "expected integer indices");
      out.back().push_back(i.get<int>());
    }
  }
  return out;
}

Box domain_of(const json& d, std::size_t m) {
  check_keys(d, {"min", "max"}, "domain");
  Box box(numbers(field(d, "min", "domain"), m, "domain.min"), numbers(field(d, "max", "domain"), m, "domain.max"));
  for (std::size_t k = 0; k < m; ++k)
    if (!(box.lo[k] < box.hi[k])) fail("domain", "min must be below max on axis " + std::to_string(k + 1));
  return box;
}

template <class T>
std::vector<T> permute(const std::vector<T>& v, const BlockLayout& layout) {
  std::vector<T> out;
  for (int k : layout.order) out.push_back(v[static_cast<std::size_t>(k)]);
  return out;
}

std::size_t dimension_of(const json& doc) {
  const json& d = field(doc, "dimension", "document");
  if (!d.is_number_integer() || d.get<int>() < 1 || d.get<int>() > 16) fail("dimension", "expected an integer in 1..16");
  return static_cast<std::size_t>(d.get<int>());
}

}  // namespace

Tolerances resolve_tolerances(const json& doc, std::optional<double> flag) {
  Tolerances t;
  if (doc.is_object() && doc.contains("tolerances")) {
    const json& b = doc["tolerances"];
    check_keys(b, {"zero", "quadrature", "reflection", "split"}, "tolerances");
    if (b.contains("zero")) t.zero = positive(b["zero"], "tolerances.zero");
    if (b.contains("quadrature")) t.quadrature = positive(b["quadrature"], "tolerances.quadrature");
    if (b.contains("reflection")) t.reflection = positive(b["reflection"], "tolerances.reflection");
    if (b.contains("split")) t.split = positive(b["split"], "tolerances.split");
  }
  if (const char* env = std::getenv("DIVWEB_TOL"); env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (*end != '\0' || !(v > 0) || !std::isfinite(v)) throw SpecError(std::string("DIVWEB_TOL: not a positive number: ") + env);
    t.zero = v;
  }
  if (flag) {
    if (!(*flag > 0) || !std::isfinite(*flag)) throw SpecError("--tol must be a positive number");
    t.zero = *flag;
  }
  return t;
}

std::vector<double> LoadedWeb::to_chart(std::span<const double> input_point) const {
  if (input_point.size() != layout.order.size())
    throw SpecError("expected a point with " + std::to_string(layout.order.size()) + " coordinates, got " +
                    std::to_string(input_point.size()));
  std::vector<double> out;
  for (int k : layout.order) out.push_back(input_point[static_cast<std::size_t>(k)]);
  return out;
}

std::vector<double> LoadedWeb::to_input(std::span<const double> chart_point) const {
  std::vector<double> out(chart_point.size());
  for (std::size_t k = 0; k < chart_point.size(); ++k) out[static_cast<std::size_t>(layout.order[k])] = chart_point[k];
  return out;
}

int LoadedWeb::chart_axis(int one_based) const {
  for (std::size_t k = 0; k < layout.order.size(); ++k)
    if (layout.order[k] == one_based - 1) return static_cast<int>(k);
  throw SpecError("axis " + std::to_string(one_based) + " outside 1.." + std::to_string(layout.order.size()));
}

LoadedWeb load_web_spec(const json& doc, std::optional<double> tol_flag) {
  check_version(doc);
  const Tolerances tol = resolve_tolerances(doc, tol_flag);
  if (doc.contains("spacetime")) {
    check_keys(doc, {"schema_version", "spacetime", "domain", "tolerances", "description"}, "document");
    const json& st = doc["spacetime"];
    check_keys(st, {"name", "params"}, "spacetime");
    const std::string name = text(field(st, "name", "spacetime"), "spacetime.name");
    std::map<std::string, double> params;
    if (st.contains("params")) {
      if (!st["params"].is_object()) fail("spacetime.params", "expected an object");
      for (const auto& [k, v] : st["params"].items()) params[k] = number(v, "spacetime.params." + k);
    }
    const SplitMetric gm = builtin_spacetime(name, params);
    const Box box = doc.contains("domain") ? domain_of(doc["domain"], 4) : builtin_domain(name, params);
    return LoadedWeb{web_from_metric(gm, box), BlockLayout{{0, 1, 2, 3}, {1, 3}}, gm.coordinates, tol, name, doc};
  }
  check_keys(doc, {"schema_version", "dimension", "variables", "blocks", "density", "domain", "tolerances", "description"},
             "document");
  const std::size_t m = dimension_of(doc);
  const auto vars = variable_list(doc, m);
  const BlockLayout layout = layout_from_index_lists(block_lists(field(doc, "blocks", "document")), static_cast<int>(m));
  const Box box = domain_of(field(doc, "domain", "document"), m);
  const auto chart_vars = permute(vars, layout);
  const Box chart_box(permute(box.lo, layout), permute(box.hi, layout));
  const std::string density = text(field(doc, "density", "document"), "density");
  return LoadedWeb{WebChart::parse(chart_vars, layout.sizes, density, chart_box), layout, vars, tol, std::nullopt, doc};
}

LoadedTensor load_tensor_spec(const json& doc) {
  check_version(doc);
  check_keys(doc, {"schema_version", "dimension", "variables", "blocks", "domain", "entries", "description"}, "document");
  const std::size_t m = dimension_of(doc);
  const auto vars = variable_list(doc, m);
  LoadedTensor out;
  out.layout = layout_from_index_lists(block_lists(field(doc, "blocks", "document")), static_cast<int>(m));
  const Box box = domain_of(field(doc, "domain", "document"), m);
  out.frame = BlockFrame{permute(vars, out.layout), out.layout.sizes};
  out.domain = Box(permute(box.lo, out.layout), permute(box.hi, out.layout));
  std::vector<int> pos(m);
  for (std::size_t k = 0; k < m; ++k) pos[static_cast<std::size_t>(out.layout.order[k])] = static_cast<int>(k);

  out.full.assign(m, std::vector<Expr>(m, Expr::constant(0.0)));
  std::vector<std::vector<int>> given(m, std::vector<int>(m, 0));
  const json& entries = field(doc, "entries", "document");
  if (!entries.is_array()) fail("entries", "expected an array");
  for (std::size_t t = 0; t < entries.size(); ++t) {
    const std::string where = "entries[" + std::to_string(t) + "]";
    const json& e = entries[t];
    check_keys(e, {"row", "col", "expr"}, where);
    const json& r = field(e, "row", where);
    const json& c = field(e, "col", where);
    if (!r.is_number_integer() || !c.is_number_integer()) fail(where, "row and col must be integers");
    const int ri = r.get<int>(), ci = c.get<int>();
    if (ri < 1 || ci < 1 || ri > static_cast<int>(m) || ci > static_cast<int>(m)) fail(where, "index outside 1..dimension");
    const auto a = static_cast<std::size_t>(pos[static_cast<std::size_t>(ri - 1)]);
    const auto b = static_cast<std::size_t>(pos[static_cast<std::size_t>(ci - 1)]);
    if (given[a][b] == 2) fail(where, "entry given twice");
    const Expr ex = parse_expr(text(field(e, "expr", where), where + ".expr"), out.frame.variables);
    out.full[a][b] = ex;
    given[a][b] = 2;
    if (given[b][a] == 0) {
      out.full[b][a] = ex;
      given[b][a] = 1;
    }
  }
  out.source = doc;
  return out;
}

BoundaryData load_boundary_spec(const json& doc, const LoadedTensor& tensor) {
  check_version(doc);
  check_keys(doc, {"schema_version", "per_block", "description"}, "document");
  const json& b = field(doc, "per_block", "document");
  if (!b.is_array() || b.size() != tensor.frame.block_sizes.size())
    fail("per_block", "expected one expression per block (" + std::to_string(tensor.frame.block_sizes.size()) + ")");
  BoundaryData out;
  for (std::size_t i = 0; i < b.size(); ++i)
    out.per_block.push_back(parse_expr(text(b[i], "per_block[" + std::to_string(i) + "]"), tensor.frame.variables));
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError(path + ": " + e.what());
  }
}

}  // namespace divweb::cli
