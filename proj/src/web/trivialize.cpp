#include <cmath>
#include <sstream>

#include "divweb/error.hpp"
#include "divweb/web.hpp"

namespace divweb {

namespace {

std::vector<double> pick_anchor(const WebChart& w, const std::optional<std::vector<double>>& anchor) {
  if (anchor) {
    if (!w.domain().contains(*anchor)) throw PreconditionError("anchor " + format_point(*anchor) + " outside domain");
    return *anchor;
  }
  std::vector<double> origin(static_cast<std::size_t>(w.dim()), 0.0);
  if (w.domain().contains(origin)) return origin;
  return w.domain().center();
}

}  // namespace

TrivializingMap::TrivializingMap(const WebChart& w, QuadratureSpec spec, std::optional<std::vector<double>> anchor,
                                 double tol)
    : web_(w), spec_(spec), anchor_(pick_anchor(w, anchor)) {
  validate(spec_);
  const TrivialityVerdict v = is_locally_trivial(w, tol);
  if (!v.trivial) {
    std::ostringstream msg;
    msg << "web is not locally trivial: |K(" << v.k + 1 << "," << v.l + 1 << ")| = " << v.max_abs << " at "
        << format_point(v.witness);
    throw PreconditionError(msg.str());
  }
  const double n = web_.block_count();
  scale_ = std::pow(web_.h(anchor_), (n - 1.0) / n);
}

std::vector<double> TrivializingMap::operator()(std::span<const double> x) const {
  if (x.size() != anchor_.size()) throw PreconditionError("point dimension differs from chart dimension");
  std::vector<double> out(x.begin(), x.end());
  for (int i = 0; i < web_.block_count(); ++i) {
    std::vector<double> y = anchor_;
    for (int k = web_.block_begin(i); k < web_.block_end(i); ++k)
      y[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
    const auto last = static_cast<std::size_t>(web_.block_end(i) - 1);
    auto g = [&](double t) {
      y[last] = t;
      return web_.h(y) / scale_;
    };
    out[last] = integrate_1d(g, anchor_[last], x[last], spec_).value;
  }
  return out;
}

double TrivializingMap::jacobian_determinant(std::span<const double> x, double step) const {
  const std::size_t m = x.size();
  std::vector<double> J(m * m);
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  for (std::size_t c = 0; c < m; ++c) {
    xp[c] = x[c] + step;
    xm[c] = x[c] - step;
    const auto fp = (*this)(xp), fm = (*this)(xm);
    for (std::size_t r = 0; r < m; ++r) J[r * m + c] = (fp[r] - fm[r]) / (2 * step);
    xp[c] = xm[c] = x[c];
  }
  // Gaussian elimination with partial pivoting.
  double det = 1.0;
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::fabs(J[r * m + c]) > std::fabs(J[piv * m + c])) piv = r;
    if (J[piv * m + c] == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < m; ++k) std::swap(J[c * m + k], J[piv * m + k]);
      det = -det;
    }
    det *= J[c * m + c];
    for (std::size_t r = c + 1; r < m; ++r) {
      const double f = J[r * m + c] / J[c * m + c];
      for (std::size_t k = c; k < m; ++k) J[r * m + k] -= f * J[c * m + k];
    }
  }
  return det;
}

}  // namespace divweb
