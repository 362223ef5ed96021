#include <algorithm>
#include <iterator>
#include <cmath>
#include <stdexcept>

#include "divweb/expr.hpp"

namespace divweb {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double radical_inverse(int base, long index) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

}  // namespace

std::string_view to_string(ZeroKind kind) {
  switch (kind) {
    case ZeroKind::kSymbolicZero: return "symbolic-zero";
    case ZeroKind::kNumericallyZero: return "numerically-zero";
    case ZeroKind::kNonzero: return "nonzero";
  }
  return "?";
}

std::vector<std::vector<double>> halton_points(const Box& domain, int count) {
  const std::size_t m = domain.dim();
  if (m > std::size(kPrimes)) throw std::invalid_argument("halton_points: dimension too large");
  std::vector<std::vector<double>> pts;
  pts.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int n = 1; n <= count; ++n) {
    std::vector<double> x(m);
    for (std::size_t k = 0; k < m; ++k)
      x[k] = domain.lo[k] + radical_inverse(kPrimes[k], n) * (domain.hi[k] - domain.lo[k]);
    pts.push_back(std::move(x));
  }
  return pts;
}

ZeroVerdict is_identically_zero(const Expr& e, const Box& domain, int samples, double tol) {
  if (samples < 1) throw std::invalid_argument("is_identically_zero: samples must be >= 1");
  ZeroVerdict v;
  const Expr s = simplify(e);
  if (s.is_constant(0.0)) return v;

  const std::size_t m = domain.dim();
  auto probe = [&](const std::vector<double>& x) {
    const double a = std::fabs(eval(s, x));
    if (a > v.max_abs || v.witness.empty() || std::isnan(a)) {
      v.max_abs = std::isnan(a) ? INFINITY : a;
      v.witness = x;
    }
  };
  if (m <= 10) {
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      std::vector<double> x(m);
      for (std::size_t k = 0; k < m; ++k) x[k] = (mask >> k) & 1u ? domain.hi[k] : domain.lo[k];
      probe(x);
    }
  }
  probe(domain.center());
  for (const auto& x : halton_points(domain, samples)) probe(x);

  v.kind = v.max_abs <= tol ? ZeroKind::kNumericallyZero : ZeroKind::kNonzero;
  return v;
}

}  // namespace divweb
