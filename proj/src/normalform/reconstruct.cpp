#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "divweb/error.hpp"
#include "divweb/normalform.hpp"

namespace divweb {

int BlockFrame::block_of(int k) const {
  int begin = 0;
  for (std::size_t i = 0; i < block_sizes.size(); ++i) {
    begin += block_sizes[i];
    if (k < begin) return static_cast<int>(i);
  }
  throw PreconditionError("coordinate index " + std::to_string(k) + " outside the block frame");
}

int BlockFrame::block_begin(int i) const {
  int begin = 0;
  for (int b = 0; b < i; ++b) begin += block_sizes[static_cast<std::size_t>(b)];
  return begin;
}

double BoundaryData::validate(const BlockFrame& frame) const {
  if (per_block.size() != frame.block_sizes.size())
    throw PreconditionError("boundary data has " + std::to_string(per_block.size()) + " entries for " +
                            std::to_string(frame.block_sizes.size()) + " blocks");
  const std::vector<double> zero(static_cast<std::size_t>(frame.dim()), 0.0);
  double h0 = 0;
  for (std::size_t i = 0; i < per_block.size(); ++i) {
    for (int k = 0; k < frame.dim(); ++k)
      if (frame.block_of(k) != static_cast<int>(i) && depends_on(per_block[i], k))
        throw PreconditionError("boundary density of block " + std::to_string(i + 1) + " depends on " +
                                frame.variables[static_cast<std::size_t>(k)] + " from another block");
    const double v = eval(per_block[i], zero);
    if (!(v > 0)) throw PreconditionError("boundary density of block " + std::to_string(i + 1) + " is not positive at 0");
    if (i == 0) {
      h0 = v;
    } else if (std::fabs(v - h0) > 1e-12 * std::max(1.0, std::fabs(h0))) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "boundary densities disagree at 0: block 1 gives " << h0 << ", block " << i + 1 << " gives " << v;
      throw PreconditionError(msg.str());
    }
  }
  return h0;
}

BoundaryData BoundaryData::from_density(const WebChart& w) {
  BoundaryData bd;
  for (int i = 0; i < w.block_count(); ++i) {
    std::vector<std::optional<Expr>> rep(static_cast<std::size_t>(w.dim()));
    for (int k = 0; k < w.dim(); ++k)
      if (w.block_of(k) != i) rep[static_cast<std::size_t>(k)] = Expr::constant(0.0);
    bd.per_block.push_back(simplify(substitute(w.density(), rep)));
  }
  return bd;
}

namespace {

AdmissibilityVerdict violation(int condition, std::vector<int> indices, const ZeroVerdict& v, std::string message) {
  AdmissibilityVerdict out;
  out.admissible = false;
  out.condition = condition;
  out.indices = std::move(indices);
  out.point = v.witness;
  out.magnitude = v.max_abs;
  out.message = std::move(message);
  return out;
}

}  // namespace

AdmissibilityVerdict check_tensor_admissible(const std::vector<std::vector<Expr>>& A, const BlockFrame& frame,
                                             const Box& domain, double tol) {
  const int m = frame.dim();
  if (static_cast<int>(A.size()) != m) throw PreconditionError("tensor has wrong number of rows");
  for (const auto& row : A)
    if (static_cast<int>(row.size()) != m) throw PreconditionError("tensor has wrong number of columns");
  if (static_cast<int>(domain.dim()) != m) throw PreconditionError("domain dimension differs from tensor dimension");
  auto at = [&](int k, int l) -> const Expr& { return A[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]; };
  auto name = [&](int k) { return frame.variables[static_cast<std::size_t>(k)]; };

  for (int k = 0; k < m; ++k)
    for (int l = k + 1; l < m; ++l) {
      const ZeroVerdict v = is_identically_zero(build::sub(at(k, l), at(l, k)), domain, kDefaultZeroSamples, tol);
      if (!v.is_zero())
        return violation(1, {k, l}, v, "A(" + name(k) + "," + name(l) + ") differs from A(" + name(l) + "," + name(k) + ")");
    }
  for (int k = 0; k < m; ++k)
    for (int l = k; l < m; ++l) {
      if (frame.block_of(k) != frame.block_of(l)) continue;
      const ZeroVerdict v = is_identically_zero(at(k, l), domain, kDefaultZeroSamples, tol);
      if (!v.is_zero())
        return violation(2, {k, l}, v, "A(" + name(k) + "," + name(l) + ") is nonzero inside one block");
    }
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        if (frame.block_of(c) == frame.block_of(a) || frame.block_of(c) == frame.block_of(b)) continue;
        const Expr d = build::sub(differentiate(at(b, c), a), differentiate(at(a, c), b));
        const ZeroVerdict v = is_identically_zero(d, domain, kDefaultZeroSamples, tol);
        if (!v.is_zero())
          return violation(3, {a, b, c}, v,
                           "d" + name(a) + " A(" + name(b) + "," + name(c) + ") differs from d" + name(b) + " A(" +
                               name(a) + "," + name(c) + ")");
      }
  return {};
}

AdmissibilityVerdict check_tensor_admissible(const SymTensorField& A, const BlockFrame& frame, const Box& domain,
                                             double tol) {
  const int m = A.dim();
  std::vector<std::vector<Expr>> full(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) full[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = A(k, l);
  return check_tensor_admissible(full, frame, domain, tol);
}

std::vector<std::size_t> DensityGrid::shape() const {
  std::vector<std::size_t> s;
  for (const auto& a : axes) s.push_back(a.size());
  return s;
}

std::vector<double> DensityGrid::point(std::size_t flat) const {
  std::vector<double> x(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    x[k] = axes[k][flat % axes[k].size()];
    flat /= axes[k].size();
  }
  return x;
}

std::vector<std::vector<double>> uniform_axes(const Box& box, int n) {
  if (n < 2) throw PreconditionError("grid needs at least 2 points per axis");
  std::vector<std::vector<double>> axes;
  for (std::size_t k = 0; k < box.dim(); ++k) {
    const double lo = box.lo[k], hi = box.hi[k];
    if (lo > 0 || hi < 0) throw PreconditionError("grid box does not contain 0 on axis " + std::to_string(k + 1));
    std::vector<double> a(static_cast<std::size_t>(n));
    std::size_t nearest = 0;
    for (int t = 0; t < n; ++t) {
      a[static_cast<std::size_t>(t)] = lo + (hi - lo) * t / (n - 1);
      if (std::fabs(a[static_cast<std::size_t>(t)]) < std::fabs(a[nearest])) nearest = static_cast<std::size_t>(t);
    }
    a[nearest] = 0.0;
    axes.push_back(std::move(a));
  }
  return axes;
}

namespace {

class Reconstructor {
 public:
  Reconstructor(const SymTensorField& A, const BoundaryData& bd, const BlockFrame& frame,
                const std::vector<std::vector<double>>& axes, const QuadratureSpec& spec, PairRule rule)
      : A_(A), bd_(bd), frame_(frame), axes_(axes), spec_(spec), rule_(rule) {
    const std::size_t m = axes.size();
    std::size_t total = 1;
    zero_.resize(m);
    stride_.resize(m);
    for (std::size_t k = m; k-- > 0;) {
      stride_[k] = total;
      total *= axes[k].size();
      zero_[k] = axes[k].size();
      for (std::size_t t = 0; t < axes[k].size(); ++t)
        if (axes[k][t] == 0.0) zero_[k] = t;
      if (zero_[k] == axes[k].size())
        throw PreconditionError("grid axis " + std::to_string(k + 1) + " does not contain 0");
    }
    values_.assign(total, std::numeric_limits<double>::quiet_NaN());
  }

  std::vector<double> run() {
    for (std::size_t f = 0; f < values_.size(); ++f) value(f);
    return values_;
  }

 private:
  std::vector<std::size_t> index_of(std::size_t flat) const {
    std::vector<std::size_t> idx(axes_.size());
    for (std::size_t k = 0; k < axes_.size(); ++k) idx[k] = (flat / stride_[k]) % axes_[k].size();
    return idx;
  }

  std::vector<double> coords(const std::vector<std::size_t>& idx) const {
    std::vector<double> x(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) x[k] = axes_[k][idx[k]];
    return x;
  }

  double value(std::size_t flat) {
    double& slot = values_[flat];
    if (!std::isnan(slot)) return slot;
    const auto idx = index_of(flat);
    const auto x = coords(idx);
    const int m = static_cast<int>(idx.size());

    std::vector<std::pair<int, int>> pairs;
    for (int j = 0; j < m; ++j)
      for (int k = j + 1; k < m; ++k)
        if (x[static_cast<std::size_t>(j)] != 0.0 && x[static_cast<std::size_t>(k)] != 0.0 &&
            frame_.block_of(j) != frame_.block_of(k))
          pairs.emplace_back(j, k);

    double h;
    if (pairs.empty()) {
      int block = 0;
      for (int k = 0; k < m; ++k)
        if (x[static_cast<std::size_t>(k)] != 0.0) block = frame_.block_of(k);
      h = eval(bd_.per_block[static_cast<std::size_t>(block)], x);
    } else {
      const auto [j, k] = rule_ == PairRule::kFirst ? pairs.front() : pairs.back();
      const auto uj = static_cast<std::size_t>(j), uk = static_cast<std::size_t>(k);
      const std::size_t fj = flat - (idx[uj] - zero_[uj]) * stride_[uj];
      const std::size_t fk = flat - (idx[uk] - zero_[uk]) * stride_[uk];
      const std::size_t fjk = fj - (idx[uk] - zero_[uk]) * stride_[uk];
      std::vector<double> y = x;
      const Expr& a = A_(j, k);
      auto integrand = [&](std::span<const double> st) {
        y[uj] = st[0];
        y[uk] = st[1];
        return eval(a, y);
      };
      const double lo[2] = {0.0, 0.0};
      const double hi[2] = {x[uj], x[uk]};
      const double integral = integrate_box(integrand, lo, hi, spec_).value;
      h = value(fj) * value(fk) / value(fjk) * std::exp(integral);
    }
    if (!(h > 0) || !std::isfinite(h)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "reconstructed density is " << h << " at " << format_point(x);
      throw NumericError(msg.str());
    }
    values_[flat] = h;
    return h;
  }

  const SymTensorField& A_;
  const BoundaryData& bd_;
  const BlockFrame& frame_;
  const std::vector<std::vector<double>>& axes_;
  QuadratureSpec spec_;
  PairRule rule_;
  std::vector<std::size_t> zero_;
  std::vector<std::size_t> stride_;
  std::vector<double> values_;
};

}  // namespace

DensityGrid reconstruct_density(const SymTensorField& A, const BoundaryData& bd, const BlockFrame& frame,
                                const std::vector<std::vector<double>>& axes, const QuadratureSpec& spec,
                                PairRule rule) {
  validate(spec);
  if (A.dim() != frame.dim() || static_cast<int>(axes.size()) != frame.dim())
    throw PreconditionError("tensor, frame and grid dimensions differ");
  bd.validate(frame);
  DensityGrid out;
  out.axes = axes;
  out.values = Reconstructor(A, bd, frame, axes, spec, rule).run();
  return out;
}

RoundTrip roundtrip_error(const WebChart& w, const std::vector<std::vector<double>>& axes, const QuadratureSpec& spec,
                          PairRule rule) {
  const DensityGrid g =
      reconstruct_density(nonuniformity_tensor(w), BoundaryData::from_density(w), BlockFrame::of(w), axes, spec, rule);
  RoundTrip out;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto x = g.point(f);
    const double h = w.h(x);
    const double err = std::fabs(g.values[f] - h) / std::fabs(h);
    if (err > out.max_rel_error || out.worst_point.empty()) {
      out.max_rel_error = err;
      out.worst_point = x;
    }
  }
  return out;
}

}  // namespace divweb
